import torch


@torch.compile
def f(x):
    y = x
    if x.sum() > 0:
        if x.max() > 5:
            y = x * 0.1
        else:
            y = x * 2
    return y

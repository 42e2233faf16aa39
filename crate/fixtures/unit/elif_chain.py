import torch


@torch.compile
def bucket(x):
    if x.mean() > 1.0:
        y = x * 2
    elif x.mean() < -1.0:
        y = x * -2
    else:
        y = x
    return y

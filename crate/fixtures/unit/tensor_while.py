import torch


@torch.compile
def shrink(x):
    while x.abs().max() > 1.0:
        x = x / 2
    return x

import torch


@torch.compile
def split(x, y):
    if (x - y).abs().sum() > 1.0:
        u = x - y
        v = x + y
    else:
        v = x * y
        u = y - x
    return u * v

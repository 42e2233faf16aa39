import torch

VERBOSE = False


@torch.compile
def f(x):
    y = torch.cos(x)
    if VERBOSE:
        print("cos", y)
    z = y * y
    return z

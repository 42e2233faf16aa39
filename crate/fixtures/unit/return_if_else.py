import torch


@torch.compile
def branch(x):
    if x > 0:
        return 1
    else:
        return -1

import torch


@torch.compile
def pad(x):
    if x.shape[0] > 2:
        x = x[:2]
    if x.dim() == 1 and x.size(0) < 4:
        x = torch.cat([x, x])
    return x

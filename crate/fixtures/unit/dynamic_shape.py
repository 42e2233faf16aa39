import torch


@torch.compile
def positives(x):
    idx = torch.nonzero(x > 0)
    vals = x.masked_select(x > 0)
    return idx, vals

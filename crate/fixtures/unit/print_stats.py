import torch


@torch.compile
def fn(x):
    x = torch.relu(x)
    print("tensor:", x)  # debug output
    return torch.sin(x)

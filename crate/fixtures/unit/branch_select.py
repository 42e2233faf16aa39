import torch


@torch.compile()
def f(x, y):
    x_1 = x*2
    y_1 = y*2
    if x.sum() > 10: # host branch
        z = x_1 + y_1
    else:
        z = x_1 * y_1
    return torch.relu(z)

# normalize: cond z_add z_mul
import torch


@torch.compile()
def f(x, y):
    x_1 = x*2
    y_1 = y*2
    cond = x.sum() > 10
    z_add = x_1 + y_1
    z_mul = x_1 * y_1

    # select instead of branching
    z = torch.where(cond, z_add, z_mul)
    return torch.relu(z)

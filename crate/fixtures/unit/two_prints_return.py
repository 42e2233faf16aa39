import torch


@torch.compile
def f(a, b):
    print("a", a)
    print("b", b)
    a = a * 2
    return a + b

import torch


def f(x):
    if x.sum() > 0:
        print("positive")
    return x.item()

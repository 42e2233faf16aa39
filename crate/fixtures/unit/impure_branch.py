import torch
import torch.nn as nn


class Block(nn.Module):
    def __init__(self):
        super().__init__()
        self.history = []

    def log_metrics(self, z):
        self.history.append(z)

    def forward(self, x):
        z = torch.tanh(x)
        if z.mean() > 0:
            self.log_metrics(z)
            z = z * 2
        return z


block = Block()
fast = torch.compile(block)

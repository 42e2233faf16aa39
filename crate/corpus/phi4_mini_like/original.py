import torch
import torch.nn as nn


class Phi3RotaryEmbedding(nn.Module):
    def __init__(self, dim, base=10000.0, original_max=16):
        super().__init__()
        self.original_max = original_max
        self.inv_freq = 1.0 / (base ** (torch.arange(0, dim, 2).float() / dim))
        self.short_factor = torch.ones(dim // 2)
        self.long_factor = torch.full((dim // 2,), 4.0)

    def forward(self, position_ids):
        if position_ids.max() + 1 > self.original_max:
            ext = self.long_factor
        else:
            ext = self.short_factor
        freqs = position_ids.unsqueeze(-1).float() * (self.inv_freq / ext)
        return torch.cos(freqs), torch.sin(freqs)


class Phi4MiniModel(nn.Module):
    def __init__(self, vocab=64, dim=32, clip=30.0):
        super().__init__()
        self.embed = nn.Embedding(vocab, dim)
        self.rotary = Phi3RotaryEmbedding(dim * 2)
        self.proj = nn.Linear(dim, dim)
        self.clip = clip

    def forward(self, input_ids, position_ids):
        h = self.embed(input_ids)
        cos, sin = self.rotary(position_ids)
        h = h * cos + h * sin
        if h.abs().max() > self.clip:
            h = torch.clamp(h, -self.clip, self.clip)
        gate = torch.sigmoid(h)
        if gate.mean() > 0.5:
            act = h * gate
            bias = gate - 0.5
        else:
            act = torch.tanh(h)
            bias = 0.5 - gate
        h = self.proj(act + bias)
        scale = torch.ones_like(h)
        if h.norm() > 100.0:
            scale = scale * 0.5
        elif h.norm() < 1.0:
            scale = scale * 2.0
        return h * scale


model = Phi4MiniModel()
compiled = torch.compile(model)

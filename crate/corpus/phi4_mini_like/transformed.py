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
        __gm_pred_0 = position_ids.max() + 1 > self.original_max
        __gm_then_ext_0 = self.long_factor
        __gm_else_ext_0 = self.short_factor
        ext = torch.where(__gm_pred_0, __gm_then_ext_0, __gm_else_ext_0)
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
        __gm_pred_0 = h.abs().max() > self.clip
        __gm_then_h_0 = torch.clamp(h, -self.clip, self.clip)
        h = torch.where(__gm_pred_0, __gm_then_h_0, h)
        gate = torch.sigmoid(h)
        __gm_pred_1 = gate.mean() > 0.5
        __gm_then_act_1 = h * gate
        __gm_then_bias_1 = gate - 0.5
        __gm_else_act_1 = torch.tanh(h)
        __gm_else_bias_1 = 0.5 - gate
        act = torch.where(__gm_pred_1, __gm_then_act_1, __gm_else_act_1)
        bias = torch.where(__gm_pred_1, __gm_then_bias_1, __gm_else_bias_1)
        h = self.proj(act + bias)
        scale = torch.ones_like(h)
        __gm_pred_2 = h.norm() > 100.0
        __gm_pred_3 = h.norm() < 1.0
        __gm_then_scale_2 = scale * 0.5
        __gm_then_scale_3 = scale * 2.0
        scale = torch.where(__gm_pred_2, __gm_then_scale_2, torch.where(__gm_pred_3, __gm_then_scale_3, scale))
        return h * scale


model = Phi4MiniModel()
compiled = torch.compile(model)

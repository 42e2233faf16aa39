import logging

import torch
import torch.nn as nn

logger = logging.getLogger(__name__)


class LongformerSelfAttention(nn.Module):
    def __init__(self, dim, window):
        super().__init__()
        self.window = window
        self.proj = nn.Linear(dim, dim)

    def forward(self, h, global_mask):
        num_global = global_mask.sum().item()
        max_global = global_mask.sum(dim=-1).max().item()
        scores = torch.matmul(h, h.transpose(-1, -2)) / self.window
        scores = scores + global_mask.unsqueeze(1) * (num_global + max_global)
        return self.proj(torch.matmul(torch.softmax(scores, dim=-1), h))


class LongformerModel(nn.Module):
    def __init__(self, vocab=64, dim=32, window=4):
        super().__init__()
        self.embed = nn.Embedding(vocab, dim)
        self.attn = LongformerSelfAttention(dim, window)
        self.pool = nn.Linear(dim, dim)

    def forward(self, input_ids, global_mask):
        __gm_defer_0 = ("padding input to window size %d", self.attn.window)
        h = self.embed(input_ids)
        h = h + self.attn(h, global_mask)
        __gm_defer_1 = ("attention done",)
        first = h[:, 0]
        scale = first.abs().mean().item()
        pooled = torch.tanh(self.pool(first)) * scale
        logger.info(*__gm_defer_0)
        logger.info(*__gm_defer_1)
        return pooled


model = LongformerModel()
compiled = torch.compile(model)

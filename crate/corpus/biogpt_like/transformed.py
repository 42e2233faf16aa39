import logging

import torch
import torch.nn as nn

logger = logging.getLogger(__name__)


class BioGptAttention(nn.Module):
    def __init__(self, dim, heads):
        super().__init__()
        self.heads = heads
        self.scale = (dim // heads) ** -0.5
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)

    def forward(self, h):
        b, t, d = h.shape
        q, k, v = self.qkv(h).chunk(3, dim=-1)
        q = q.view(b, t, self.heads, -1).transpose(1, 2)
        k = k.view(b, t, self.heads, -1).transpose(1, 2)
        v = v.view(b, t, self.heads, -1).transpose(1, 2)
        scores = torch.matmul(q, k.transpose(-1, -2)) * self.scale
        probs = torch.softmax(scores, dim=-1)
        ctx = torch.matmul(probs, v).transpose(1, 2).reshape(b, t, d)
        return self.out(ctx)


class BioGptModel(nn.Module):
    def __init__(self, vocab=64, dim=32, heads=4):
        super().__init__()
        self.embed = nn.Embedding(vocab, dim)
        self.attn = BioGptAttention(dim, heads)
        self.norm = nn.LayerNorm(dim)
        self.head = nn.Linear(dim, vocab)

    def forward(self, input_ids):
        __gm_defer_0 = ("biogpt input shape %s", input_ids.shape)
        h = self.embed(input_ids)
        h = h + self.attn(self.norm(h))
        __gm_defer_1 = ("hidden state computed",)
        logits = self.head(self.norm(h))
        logger.info(*__gm_defer_0)
        logger.debug(*__gm_defer_1)
        return logits


model = BioGptModel()
compiled = torch.compile(model)

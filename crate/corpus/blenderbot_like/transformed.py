import logging

import torch
import torch.nn as nn
import torch.nn.functional as F

logger = logging.getLogger(__name__)


class BlenderbotEncoderLayer(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.fc1 = nn.Linear(dim, 4 * dim)
        self.fc2 = nn.Linear(4 * dim, dim)
        self.norm = nn.LayerNorm(dim)

    def forward(self, h):
        residual = h
        h = self.norm(h)
        h = self.fc2(F.gelu(self.fc1(h)))
        return residual + h


class BlenderbotModel(nn.Module):
    def __init__(self, vocab=64, dim=32, layers=2):
        super().__init__()
        self.embed = nn.Embedding(vocab, dim)
        self.layers = nn.ModuleList([BlenderbotEncoderLayer(dim) for _ in range(layers)])
        self.lm_head = nn.Linear(dim, vocab, bias=False)

    def forward(self, input_ids, attention_mask):
        __gm_defer_0 = ("attention mask provided for %d tokens", attention_mask.shape[-1])
        h = self.embed(input_ids) * attention_mask.unsqueeze(-1)
        for layer in self.layers:
            h = layer(h)
        __gm_defer_1 = ("encoder finished",)
        logits = self.lm_head(h)
        __gm_defer_2 = ("decoder head applied",)
        logits = logits - logits.mean(dim=-1, keepdim=True)
        logger.warning(*__gm_defer_0)
        logger.info(*__gm_defer_1)
        logger.info(*__gm_defer_2)
        return logits


model = BlenderbotModel()
compiled = torch.compile(model)

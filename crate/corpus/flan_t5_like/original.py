import logging

import torch
import torch.nn as nn

logger = logging.getLogger(__name__)


class T5LayerNorm(nn.Module):
    def __init__(self, dim, eps=1e-6):
        super().__init__()
        self.weight = nn.Parameter(torch.ones(dim))
        self.eps = eps

    def forward(self, h):
        variance = h.pow(2).mean(-1, keepdim=True)
        return self.weight * h * torch.rsqrt(variance + self.eps)


class T5Block(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.norm = T5LayerNorm(dim)
        self.wi = nn.Linear(dim, 2 * dim, bias=False)
        self.wo = nn.Linear(2 * dim, dim, bias=False)

    def forward(self, h):
        logger.debug("t5 block input %s", h.shape)
        return h + self.wo(torch.relu(self.wi(self.norm(h))))


class FlanT5Model(nn.Module):
    def __init__(self, vocab=64, dim=32):
        super().__init__()
        self.shared = nn.Embedding(vocab, dim)
        self.block = T5Block(dim)
        self.final_norm = T5LayerNorm(dim)

    def forward(self, input_ids, decoder_input_ids):
        logger.info("encoding %d tokens", input_ids.shape[-1])
        enc = self.block(self.shared(input_ids))
        dec = self.shared(decoder_input_ids)
        logger.info("decoding %d tokens", decoder_input_ids.shape[-1])
        dec = dec + enc.mean(dim=1, keepdim=True)
        out = self.final_norm(dec)
        return torch.matmul(out, self.shared.weight.t())


model = FlanT5Model()
compiled = torch.compile(model)

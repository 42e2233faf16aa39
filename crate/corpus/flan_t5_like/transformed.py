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
        __gm_defer_0 = ("t5 block input %s", h.shape)
        __gm_ret_0 = h + self.wo(torch.relu(self.wi(self.norm(h))))
        logger.debug(*__gm_defer_0)
        return __gm_ret_0


class FlanT5Model(nn.Module):
    def __init__(self, vocab=64, dim=32):
        super().__init__()
        self.shared = nn.Embedding(vocab, dim)
        self.block = T5Block(dim)
        self.final_norm = T5LayerNorm(dim)

    def forward(self, input_ids, decoder_input_ids):
        __gm_defer_0 = ("encoding %d tokens", input_ids.shape[-1])
        enc = self.block(self.shared(input_ids))
        dec = self.shared(decoder_input_ids)
        __gm_defer_1 = ("decoding %d tokens", decoder_input_ids.shape[-1])
        dec = dec + enc.mean(dim=1, keepdim=True)
        out = self.final_norm(dec)
        __gm_ret_0 = torch.matmul(out, self.shared.weight.t())
        logger.info(*__gm_defer_0)
        logger.info(*__gm_defer_1)
        return __gm_ret_0


model = FlanT5Model()
compiled = torch.compile(model)

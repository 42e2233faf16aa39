import logging

import torch
import torch.nn as nn

logger = logging.getLogger(__name__)


class PegasusForCausalLM(nn.Module):
    def __init__(self, vocab=32, dim=16):
        super().__init__()
        self.embed = nn.Embedding(vocab, dim)
        self.fc = nn.Linear(dim, dim)
        self.lm_head = nn.Linear(dim, vocab)

    def forward(self, input_ids):
        __gm_defer_0 = ("tiny random model, outputs are meaningless",)
        h = torch.relu(self.fc(self.embed(input_ids)))
        __gm_defer_1 = ("computed hidden states of shape %s", h.shape)
        logits = self.lm_head(h)
        logger.warning(*__gm_defer_0)
        logger.info(*__gm_defer_1)
        return logits


model = PegasusForCausalLM()
compiled = torch.compile(model)

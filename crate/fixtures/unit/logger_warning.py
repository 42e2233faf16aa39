import logging

import torch

logger = logging.getLogger(__name__)


@torch.compile
def f(x):
    logger.warning("start")
    out = torch.relu(x) + 1
    return out

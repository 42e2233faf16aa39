import logging

import torch

log = logging.getLogger("wrap")


def body(x):
    log.info("body called")
    y = torch.exp(x)
    return y


compiled_body = torch.compile(body, mode="reduce-overhead")

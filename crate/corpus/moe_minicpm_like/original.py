import torch
import torch.nn as nn


class Expert(nn.Module):
    def __init__(self, dim):
        super().__init__()
        self.up = nn.Linear(dim, 2 * dim)
        self.down = nn.Linear(2 * dim, dim)

    def forward(self, h):
        return self.down(torch.relu(self.up(h)))


class MiniCPMMoE(nn.Module):
    def __init__(self, dim=16, experts=4, top_k=2):
        super().__init__()
        self.top_k = top_k
        self.gate = nn.Linear(dim, experts, bias=False)
        self.experts = nn.ModuleList([Expert(dim) for _ in range(experts)])
        self.expert0 = self.experts[0]
        self.expert1 = self.experts[1]
        self.expert2 = self.experts[2]
        self.expert3 = self.experts[3]

    def forward(self, h):
        logits = self.gate(h)
        weights, chosen = torch.topk(torch.softmax(logits, dim=-1), self.top_k, dim=-1)
        flat = chosen.reshape(-1)
        active = torch.unique(flat)
        counts = torch.bincount(flat, minlength=4)
        order = torch.argwhere(counts)
        tokens = torch.arange(h.shape[0]).repeat_interleave(self.top_k)
        load = torch.bincount(tokens, minlength=h.shape[0])
        out = torch.zeros_like(h)

        rows0 = torch.nonzero(flat == 0).squeeze(-1)
        sel0 = torch.masked_select(weights.reshape(-1), flat == 0)
        out.index_add_(0, tokens[rows0], self.expert0(h[tokens[rows0]]) * sel0.unsqueeze(-1))

        rows1 = torch.nonzero(flat == 1).squeeze(-1)
        sel1 = torch.masked_select(weights.reshape(-1), flat == 1)
        out.index_add_(0, tokens[rows1], self.expert1(h[tokens[rows1]]) * sel1.unsqueeze(-1))

        rows2 = torch.nonzero(flat == 2).squeeze(-1)
        sel2 = torch.masked_select(weights.reshape(-1), flat == 2)
        out.index_add_(0, tokens[rows2], self.expert2(h[tokens[rows2]]) * sel2.unsqueeze(-1))

        rows3 = torch.nonzero(flat == 3).squeeze(-1)
        sel3 = torch.masked_select(weights.reshape(-1), flat == 3)
        out.index_add_(0, tokens[rows3], self.expert3(h[tokens[rows3]]) * sel3.unsqueeze(-1))

        runs = torch.unique_consecutive(flat)
        present = active.nonzero()
        return out + 0.0 * (runs.sum() + present.sum() + order.sum() + load.sum())


model = MiniCPMMoE()
compiled = torch.compile(model)

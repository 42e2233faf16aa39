import torch
import torch.nn as nn


class AudioEncoder(nn.Module):
    def __init__(self, mels=8, dim=32):
        super().__init__()
        self.conv = nn.Conv1d(mels, dim, kernel_size=3, padding=1)
        self.proj = nn.Linear(dim, dim)

    def forward(self, features):
        return self.proj(torch.relu(self.conv(features)).transpose(1, 2))


class QwenAudioModel(nn.Module):
    def __init__(self, vocab=64, dim=32):
        super().__init__()
        self.audio = AudioEncoder(dim=dim)
        self.embed = nn.Embedding(vocab, dim)
        self.lm_head = nn.Linear(dim, vocab)

    def forward(self, input_ids, audio_features):
        text = self.embed(input_ids)
        audio = self.audio(audio_features)
        __gm_pred_0 = audio_features.sum() > 0
        __gm_then_fused_0 = text + audio.mean(dim=1, keepdim=True)
        __gm_else_fused_0 = text
        fused = torch.where(__gm_pred_0, __gm_then_fused_0, __gm_else_fused_0)
        hidden = torch.tanh(fused)
        __gm_pred_1 = hidden.max() > 0.9
        __gm_then_hidden_1 = hidden * 0.9
        hidden = torch.where(__gm_pred_1, __gm_then_hidden_1, hidden)
        return self.lm_head(hidden)


model = QwenAudioModel()
compiled = torch.compile(model)

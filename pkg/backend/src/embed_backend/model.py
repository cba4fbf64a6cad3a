"""Transformer-backed embedding (best effort; excluded from CI).

Loads a pretrained long-document model and returns the document-level
representation: the hidden state of the classification token, one vector
per input text, truncated to the configured maximum sequence length.
Requires the optional `model` extra (transformers + torch).
"""

import numpy as np


class TransformerEmbedder:
    def __init__(self, model_name: str, max_seq_len: int = 4096, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError(
                "model mode needs the 'model' extra (pip install embed-backend[model])"
            ) from exc
        self._torch = torch
        self.max_seq_len = max_seq_len
        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name).to(device).eval()

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        torch = self._torch
        vectors: list[np.ndarray] = []
        with torch.no_grad():
            for text in texts:
                encoded = self.tokenizer(
                    text,
                    truncation=True,
                    max_length=self.max_seq_len,
                    return_tensors="pt",
                ).to(self.device)
                output = self.model(**encoded)
                # Classification-token vector as the document representation.
                cls = output.last_hidden_state[:, 0, :].squeeze(0)
                vectors.append(cls.cpu().numpy().astype(np.float64))
        return vectors

"""vernqa: desk-scale multilingual medical question answering.

Dual-encoder retrieval over a QA-pair corpus, dense similarity index with
int8 quantization, cluster-based extractive summarizer, translation
adapters, evaluation metrics, and an HTTP service plus CLI.
"""

__version__ = "0.1.0"

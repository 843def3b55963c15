"""Reference external orderer: a seq2seq model trained on text-to-marker
pairs and served over the order-bench wire protocol.

This package never imports order_bench; it talks to the benchmark only
through its documented surfaces (the corpus file format, the encoding
contract, and the ndjson wire protocol).
"""

__version__ = "0.1.0"

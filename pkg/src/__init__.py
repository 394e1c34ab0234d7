"""Intrinsic dimension estimation for embedding matrices"""

__version__ = "1.0.0"
TOOL_NAME = "embedding-id"

"""Configuration management for the embedding ID toolkit"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Application configuration

    Values that define results are fixed here; only throughput and
    verbosity knobs are read from the environment.
    """

    # Estimation defaults
    DEFAULT_K = 5
    DEFAULT_SEED = 42
    ZERO_EPS = 1e-12

    # kNN kernel tiling and worker threads (-1 = all cores)
    THREADS = int(os.getenv("EMBEDDING_ID_THREADS", "-1"))
    QUERY_BLOCK = int(os.getenv("EMBEDDING_ID_QUERY_BLOCK", "512"))
    REFERENCE_BLOCK = int(os.getenv("EMBEDDING_ID_REFERENCE_BLOCK", "8192"))

    # Density curves
    KDE_GRID_POINTS = 512
    HISTOGRAM_BINS = 50

    # Checkpoint series
    STEP_PATTERN = r"step(\d+)"

    # Logging
    LOG_LEVEL = os.getenv("EMBEDDING_ID_LOG_LEVEL", "INFO")


config = Config()

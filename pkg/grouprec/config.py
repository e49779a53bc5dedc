from pathlib import Path
import logging
import os

from dotenv import load_dotenv

# Load environment variables from the repo root .env (if present).
REPO_ROOT = Path(__file__).resolve().parents[1]
load_dotenv(REPO_ROOT / ".env")

WORKDIR = Path(os.getenv("GROUPREC_WORKDIR", "./grouprec_runs"))
DATABASE_URL = os.getenv("GROUPREC_DATABASE_URL")  # None -> sqlite file inside the workdir
MASTER_SEED = int(os.getenv("GROUPREC_SEED", "0"))
LOG_LEVEL = os.getenv("GROUPREC_LOG_LEVEL", "INFO").upper()
MOVIELENS_PATH = os.getenv("GROUPREC_MOVIELENS")

# Defaults taken from the experimental protocol.
DEFAULT_DIM = 150
DEFAULT_MIN_RATINGS = 100
DEFAULT_HOLDOUT_FRAC = 0.30
DEFAULT_REPETITIONS = 5
DEFAULT_SIM_THRESHOLD = 0.60
DEFAULT_BETA = 0.5
DEFAULT_RELEVANCE_THRESHOLD = 4.0
GAMMA_GRID = tuple(2.0 ** p for p in range(-3, 4))
LAMBDA_GRID = tuple(round(0.1 * i, 1) for i in range(11))

# Number of groups per (kind, size).
GROUP_COUNTS = {
    "random": {2: 294, 4: 146, 6: 98, 8: 72},
    "similar": {2: 190, 4: 40, 6: 18, 8: 10},
}

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def database_url_for(workdir: Path) -> str:
    if DATABASE_URL:
        return DATABASE_URL
    return f"sqlite:///{Path(workdir) / 'grouprec.db'}"


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Configure root logging once for CLI runs."""
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=_LOG_FORMAT)

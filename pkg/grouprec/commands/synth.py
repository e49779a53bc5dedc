import logging
from pathlib import Path

import pandas as pd

from ..synthetic import clustered_ratings

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="write a clustered synthetic ratings CSV")
    parser.add_argument("--out", required=True, help="CSV file to write (user,item,rating)")
    parser.add_argument("--users", type=int, default=120)
    parser.add_argument("--clusters", type=int, default=3)
    parser.add_argument("--items-per-cluster", type=int, default=20)
    parser.add_argument("--ratings-per-user", type=int, default=25)
    parser.add_argument("--seed", type=int, default=0)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    triples = clustered_ratings(
        n_users=args.users,
        n_clusters=args.clusters,
        items_per_cluster=args.items_per_cluster,
        ratings_per_user=args.ratings_per_user,
        seed=args.seed,
    )
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    # no header: the csv reader takes every line as a rating
    pd.DataFrame(triples, columns=["user", "item", "rating"]).to_csv(path, index=False, header=False)
    print(f"Wrote {len(triples)} ratings to {path}")
    return 0

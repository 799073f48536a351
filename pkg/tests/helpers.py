"""Shared fixtures: the worked-example table/question and a small gazetteer."""

from sketchsql.tables import Table
from sketchsql.tagger import Gazetteer

# 13 tokens: the | spoofed | title | with | mort | drucker | as | the |
#            artist | for | issue | 88.5 | ?
MAGAZINE_QUESTION = "the spoofed title with mort drucker as the artist for issue 88.5?"

MAGAZINE_CONTENT_TAGS = [
    "none", "column", "column", "none", "artist", "artist",
    "none", "none", "column", "none", "column", "issue", "none",
]

MAGAZINE_INSENSITIVE_TAGS = [
    "none", "column", "column", "none", "person", "person",
    "none", "none", "column", "none", "column", "float", "none",
]

MAGAZINE_GOLD_SQL = {"sel": 0, "agg": 0, "conds": [[1, 0, "mort drucker"], [2, 0, "88.5"]]}


def magazine_table() -> Table:
    return Table(
        id="mag",
        header=["spoofed title", "artist", "issue"],
        types=["text", "text", "real"],
        rows=[
            ["star blecch", "mort drucker", 88.5],
            ["the empire strikes out", "al jaffee", 203],
            ["star roars", "mort drucker", 356],
        ],
    )


def demo_gazetteer() -> Gazetteer:
    return Gazetteer([
        ("mort drucker", "person"),
        ("al jaffee", "person"),
        ("new york", "place"),
        ("france", "country"),
        ("red sox", "organization"),
        ("baseball", "sport"),
    ])

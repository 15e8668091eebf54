#!/usr/bin/env python3
"""Fetch the western US power grid network and write data/powergrid.txt.

The graph (4941 vertices, 6594 edges) is the reference instance for the
condition-number acceptance test.  Two public mirrors are tried in
order; the first that answers wins:

1. Newman's network collection (GML inside a zip archive)
2. KONECT's opsahl-powergrid bundle (TSV inside a tar.bz2 archive)

The output is a plain whitespace edge list accepted by every resistor
loader and CLI command.
"""

from __future__ import annotations

import argparse
import io
import re
import sys
import tarfile
import urllib.request
import zipfile
from pathlib import Path

NEWMAN_URL = "http://websites.umich.edu/~mejn/netdata/power.zip"
KONECT_URL = "http://konect.cc/files/download.tsv.opsahl-powergrid.tar.bz2"


def _fetch(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def _edges_from_newman(payload: bytes) -> list:
    with zipfile.ZipFile(io.BytesIO(payload)) as archive:
        name = next(n for n in archive.namelist() if n.endswith(".gml"))
        text = archive.read(name).decode("ascii", errors="replace")
    # in this GML file "source"/"target" appear only inside edge blocks
    edges = re.findall(r"source\s+(\d+)\s+target\s+(\d+)", text)
    return [(int(u), int(v)) for u, v in edges]


def _edges_from_konect(payload: bytes) -> list:
    with tarfile.open(fileobj=io.BytesIO(payload), mode="r:bz2") as archive:
        member = next(
            m for m in archive.getmembers()
            if Path(m.name).name.startswith("out.")
        )
        text = archive.extractfile(member).read().decode("ascii")
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        u, v = line.split()[:2]
        edges.append((int(u), int(v)))
    return edges


SOURCES = [
    ("newman", NEWMAN_URL, _edges_from_newman),
    ("konect", KONECT_URL, _edges_from_konect),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--dest",
        type=Path,
        default=Path(__file__).resolve().parents[1] / "data" / "powergrid.txt",
        help="output edge-list path (default: data/powergrid.txt)",
    )
    args = parser.parse_args()

    edges = None
    for name, url, parse in SOURCES:
        try:
            print(f"trying {name}: {url}")
            edges = parse(_fetch(url))
            break
        except Exception as exc:  # noqa: BLE001 - report and try the next mirror
            print(f"  {name} failed: {exc}", file=sys.stderr)
    if not edges:
        print("all sources failed; fetch the dataset manually and save it "
              f"as {args.dest}", file=sys.stderr)
        return 1

    nodes = {u for u, _ in edges} | {v for _, v in edges}
    args.dest.parent.mkdir(parents=True, exist_ok=True)
    with open(args.dest, "w", encoding="ascii") as out:
        for u, v in edges:
            out.write(f"{u} {v}\n")
    print(f"wrote {len(edges)} edges over {len(nodes)} vertices to {args.dest}")
    if len(nodes) != 4941 or len(edges) != 6594:
        print("warning: expected 4941 vertices / 6594 edges", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

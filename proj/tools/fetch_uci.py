#!/usr/bin/env python3
"""Fetches the small UCI benchmark bundle used by the acceptance suite.

Outputs land in data/uci/ as comma-separated files with no header and the
label in the last column:

    blogger.csv      (classification, 100 rows)
    vertebral.csv    (classification, 310 rows, 3 classes)
    tic-tac-toe.csv  (classification, 958 rows)
    ale.csv          (regression, 107 rows)

Normalized files are hashed and checked against tools/uci_checksums.sha256.
The pin file ships empty because this repository is built in an offline
environment; the first successful fetch records the pins (trust-on-first-use)
and every later run fails closed if a file drifts. Re-pin deliberately with
--repin after verifying a change upstream.

Run `fetch_uci.py --selftest` for an offline check of the format converters.
"""

import argparse
import hashlib
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT_DIR = ROOT / "data" / "uci"
PIN_FILE = Path(__file__).resolve().parent / "uci_checksums.sha256"


def fetch(urls):
    last_error = None
    for url in urls:
        try:
            request = urllib.request.Request(url, headers={"User-Agent": "dmrf-fetch/1.0"})
            with urllib.request.urlopen(request, timeout=60) as response:
                return response.read()
        except Exception as error:  # try the next mirror
            last_error = error
    raise RuntimeError(f"all mirrors failed ({last_error})")


def rows_to_csv(rows):
    return "".join(",".join(cell.strip() for cell in row) + "\n" for row in rows)


def normalize_arff(raw):
    """ARFF: skip the header, keep the @data rows (label already last)."""
    rows = []
    in_data = False
    for line in raw.decode("utf-8", errors="replace").splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if stripped.lower().startswith("@data"):
            in_data = True
            continue
        if stripped.startswith("@"):
            continue
        if in_data:
            rows.append(stripped.split(","))
    return rows


def normalize_vertebral(raw):
    """ZIP containing column_3C.dat: whitespace separated, class token last."""
    with zipfile.ZipFile(io.BytesIO(raw)) as archive:
        name = next(n for n in archive.namelist() if n.endswith("column_3C.dat"))
        text = archive.read(name).decode("utf-8", errors="replace")
    return [line.split() for line in text.splitlines() if line.strip()]


def normalize_csv(raw):
    """Plain CSV without a header, label already last."""
    return [line.split(",") for line in raw.decode("utf-8", errors="replace").splitlines()
            if line.strip()]


def normalize_ale(raw):
    """CSV with a header; the column whose name starts with 'ale' becomes the
    label (moved last), everything else stays a feature."""
    lines = [line for line in raw.decode("utf-8", errors="replace").splitlines() if line.strip()]
    header = [cell.strip().lower() for cell in lines[0].split(",")]
    target = next((i for i, name in enumerate(header) if name.startswith("ale")), len(header) - 1)
    rows = []
    for line in lines[1:]:
        cells = [cell.strip() for cell in line.split(",")]
        rows.append([c for i, c in enumerate(cells) if i != target] + [cells[target]])
    return rows


DATASETS = [
    (
        "blogger.csv",
        [
            "https://archive.ics.uci.edu/ml/machine-learning-databases/00304/BLOGGER.arff",
            "https://archive.ics.uci.edu/static/public/304/blogger.zip",
        ],
        normalize_arff,
    ),
    (
        "vertebral.csv",
        [
            "https://archive.ics.uci.edu/ml/machine-learning-databases/00212/vertebral_column_data.zip",
            "https://archive.ics.uci.edu/static/public/212/vertebral+column.zip",
        ],
        normalize_vertebral,
    ),
    (
        "tic-tac-toe.csv",
        [
            "https://archive.ics.uci.edu/ml/machine-learning-databases/tic-tac-toe/tic-tac-toe.data",
            "https://archive.ics.uci.edu/static/public/101/tic+tac+toe+endgame.zip",
        ],
        normalize_csv,
    ),
    (
        "ale.csv",
        [
            "https://archive.ics.uci.edu/ml/machine-learning-databases/00422/mcs_ds_edited_iter_shuffled.csv",
            "https://archive.ics.uci.edu/static/public/422/average+localization+error+ale+in+sensor+node+localization+process+in+wsns.zip",
        ],
        normalize_ale,
    ),
]


def load_pins():
    pins = {}
    if PIN_FILE.exists():
        for line in PIN_FILE.read_text().splitlines():
            parts = line.split()
            if len(parts) == 2:
                pins[parts[1]] = parts[0]
    return pins


def save_pins(pins):
    PIN_FILE.write_text("".join(f"{digest}  {name}\n" for name, digest in sorted(pins.items())))


def selftest():
    arff = b"@relation x\n@attribute a numeric\n@data\n1,2,yes\n3,4,no\n"
    assert normalize_arff(arff) == [["1", "2", "yes"], ["3", "4", "no"]]

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        archive.writestr("column_3C.dat", "1.5 2.5 DH\n3.5 4.5 NO\n")
    assert normalize_vertebral(buffer.getvalue()) == [["1.5", "2.5", "DH"], ["3.5", "4.5", "NO"]]

    assert normalize_csv(b"x,o,positive\nb,b,negative\n") == [
        ["x", "o", "positive"],
        ["b", "b", "negative"],
    ]

    ale = b"anchor,range,ale(m),iters\n10,20,0.5,3\n11,21,0.6,4\n"
    assert normalize_ale(ale) == [["10", "20", "3", "0.5"], ["11", "21", "4", "0.6"]]

    assert rows_to_csv([["1", "2"], ["3", "4"]]) == "1,2\n3,4\n"
    print("selftest ok")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repin", action="store_true",
                        help="overwrite recorded checksums with the fetched files")
    parser.add_argument("--selftest", action="store_true",
                        help="check the format converters offline and exit")
    args = parser.parse_args()
    if args.selftest:
        selftest()
        return 0

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    pins = load_pins()
    failures = 0
    for name, urls, normalize in DATASETS:
        target = OUT_DIR / name
        try:
            raw = fetch(urls)
            content = rows_to_csv(normalize(raw))
        except Exception as error:
            print(f"{name}: FAILED ({error})", file=sys.stderr)
            failures += 1
            continue

        digest = hashlib.sha256(content.encode()).hexdigest()
        if name in pins and not args.repin:
            if pins[name] != digest:
                print(f"{name}: checksum mismatch (expected {pins[name]}, got {digest}); "
                      f"refusing to write. Use --repin if the change is intended.",
                      file=sys.stderr)
                failures += 1
                continue
        else:
            pins[name] = digest
            print(f"{name}: recording new pin {digest[:16]}...")

        target.write_text(content)
        rows = content.count("\n")
        print(f"{name}: {rows} rows -> {target}")

    save_pins(pins)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

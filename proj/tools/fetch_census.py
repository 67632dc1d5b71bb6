#!/usr/bin/env python3
"""Build data/census.csv (the 48,842-record UCI CensusIncome / "adult" table).

The UCI host is not always reachable, so the raw files are taken from the
`responsibly` wheel on PyPI, which vendors adult.data and adult.test
unchanged. Output: one header row, whitespace stripped, the trailing '.'
on adult.test income labels removed, '?' kept as an ordinary label.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]


def rows_from(text):
    for line in io.StringIO(text):
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(COLUMNS):
            continue
        fields[-1] = fields[-1].rstrip(".")
        yield fields


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "census.csv"))
    ap.add_argument("--wheel", help="use an already downloaded responsibly wheel")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel
        if wheel is None:
            subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                            "--dest", tmp, "responsibly==0.1.2"], check=True)
            wheel = next(pathlib.Path(tmp).glob("responsibly-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            train = z.read("responsibly/dataset/adult/adult.data").decode()
            test = z.read("responsibly/dataset/adult/adult.test").decode()

    rows = list(rows_from(train)) + list(rows_from(test))
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="\n") as f:
        f.write(",".join(COLUMNS) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")
    print(f"wrote {len(rows)} records to {out}")


if __name__ == "__main__":
    main()

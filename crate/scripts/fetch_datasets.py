#!/usr/bin/env python3
"""Rebuild the benchmark CSVs under data/ from dataset copies shipped inside PyPI packages.

The ten small datasets used by the acceptance suite are already checked in.
Run with --extra to additionally build the larger benchmark datasets that are
not bundled. Every output file is UTF-8 CSV with a header row and the class
label in the last column, named ``class``.

    python3 scripts/fetch_datasets.py            # rebuild bundled files
    python3 scripts/fetch_datasets.py --extra    # also build the extra datasets

Sources (only PyPI needs to be reachable):
  * Orange 2.7.8 source distribution (Orange/datasets/*.tab)
  * common-datasets 0.3.10 wheel (KEEL-format .dat files)
  * keel-ds 0.2.5 wheel (header-less KEEL exports)

Datasets from the benchmark list that none of these packages carry
(vertebral, tvowel, ilpd, knowledge, diabetes, skulls, physio, breasttissue)
have to be placed in data/ by hand in the same CSV layout.
"""

import argparse
import csv
import json
import subprocess
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def pip_download(spec, dest):
    cmd = [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(dest), spec]
    subprocess.run(cmd, check=True)


def fetch_sdist(project, version, dest):
    # Orange 2 is Python 2 only, so pip cannot prepare its metadata; take the archive directly.
    meta = json.load(urllib.request.urlopen(f"https://pypi.org/pypi/{project}/json"))
    url = next(u["url"] for u in meta["releases"][version] if u["filename"].endswith(".tar.gz"))
    out = dest / url.rsplit("/", 1)[1]
    with urllib.request.urlopen(url) as resp, open(out, "wb") as fh:
        fh.write(resp.read())
    return out


def read_orange_tab(text, label_name=None):
    """Parse an Orange 2 three-header-line .tab file into (names, rows)."""
    lines = text.splitlines()
    names = lines[0].split("\t")
    flags = lines[2].split("\t") + [""] * len(names)
    keep = []
    label = None
    for i, name in enumerate(names):
        flag = flags[i].strip()
        if flag == "class" or name.strip() == label_name:
            label = i
        elif flag in ("i", "meta", "ignore"):
            continue
        else:
            keep.append(i)
    rows = []
    for line in lines[3:]:
        if not line.strip():
            continue
        cells = line.split("\t")
        rows.append([cells[i].strip() for i in keep] + [cells[label].strip()])
    return [names[i].strip() for i in keep] + ["class"], rows


def read_keel(text):
    """Parse a KEEL .dat file (ARFF-like header optional); class is the last column."""
    names = []
    rows = []
    in_data = False
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        low = s.lower()
        if not in_data and low.startswith("@attribute"):
            names.append(s.split()[1])
            continue
        if not in_data and low.startswith("@data"):
            in_data = True
            continue
        if low.startswith("@"):
            continue
        in_data = True
        rows.append([c.strip() for c in s.split(",")])
    if not names:
        names = [f"x{i}" for i in range(len(rows[0]) - 1)] + ["class"]
    names[-1] = "class"
    return names, rows


def read_uci_whitespace(text, names):
    """Whitespace-separated UCI file whose first column is an identifier."""
    rows = [line.split()[1:] for line in text.splitlines() if line.strip()]
    return names, rows


def write_csv(name, header, rows):
    bad = [r for r in rows if any(c in ("?", "", "<null>") for c in r)]
    rows = [r for r in rows if r not in bad]
    with open(DATA / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"{name}: {len(rows)} rows, {len(header) - 1} features" + (f" ({len(bad)} incomplete rows dropped)" if bad else ""))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--extra", action="store_true", help="also build non-bundled datasets")
    args = ap.parse_args()
    DATA.mkdir(exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        pip_download("common-datasets==0.3.10", tmp)
        pip_download("keel-ds==0.2.5", tmp)

        orange = tarfile.open(fetch_sdist("Orange", "2.7.8", tmp))

        def tab(name, label_name=None):
            member = orange.getmember(f"Orange-2.7.8/Orange/datasets/{name}.tab")
            return read_orange_tab(orange.extractfile(member).read().decode("latin-1"), label_name)

        common = zipfile.ZipFile(next(tmp.glob("common_datasets-*.whl")))

        def cds(path):
            return read_keel(common.read(f"common_datasets/data/classification/{path}").decode("latin-1"))

        keel = zipfile.ZipFile(next(tmp.glob("keel_ds-*.whl")))

        def kds(name):
            return read_keel(keel.read(f"keel_ds/data/balanced/raw/{name}.dat").decode("latin-1"))

        bundled = {
            "iris": lambda: tab("iris"),
            "glass": lambda: tab("glass"),
            "sonar": lambda: kds("sonar"),
            "monks": lambda: tab("monks-1_test"),
            "haberman": lambda: cds("haberman/haberman.dat"),
            "hayes_roth": lambda: tab("hayes-roth_learn"),
            "newthyroid": lambda: cds("newthyroid/newthyroid.dat"),
            "zoo": lambda: tab("zoo"),
            "bupa": lambda: tab("bupa"),
            "car_eval": lambda: tab("car"),
        }
        extra = {
            "mushroom": lambda: kds("mushroom"),
            "cmc": lambda: cds("contraceptive/contraceptive.dat"),
            "balance_scale": lambda: cds("balance/balance.dat"),
            "german": lambda: kds("german"),
            "ionosphere": lambda: cds("ionosphere/ionosphere.dat"),
            "movement_libras": lambda: cds("movement_libras/movement_libras.dat"),
            "saheart": lambda: cds("saheart/saheart.dat"),
            "spam": lambda: kds("spambase"),
            "yeast": lambda: read_uci_whitespace(
                common.read("common_datasets/data/classification/yeast/yeast.data.txt").decode("latin-1"),
                ["mcg", "gvh", "alm", "mit", "erl", "pox", "vac", "nuc", "class"],
            ),
            "cleveland": lambda: cds("cleveland/cleveland.dat"),
            "lymphography": lambda: tab("lymphography"),
            "flags": lambda: tab("flag", "Religion"),
        }
        todo = dict(bundled)
        if args.extra:
            todo.update(extra)
        for name, load in todo.items():
            try:
                header, rows = load()
            except KeyError as e:
                print(f"{name}: not found in source package ({e})", file=sys.stderr)
                continue
            write_csv(name, header, rows)


if __name__ == "__main__":
    main()

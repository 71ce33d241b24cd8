#!/usr/bin/env python3
"""Write the WDBC data bundled with scikit-learn as a 32-column CSV.

scikit-learn ships the 569 x 30 feature matrix without the sample ids, so
ids are synthesised as sequential integers. The ids are discarded on load.
"""
import argparse

from sklearn.datasets import load_breast_cancer

from bdrga.dataset import write_wdbc_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("output", help="destination CSV path")
    ap.add_argument("--no-header", action="store_true")
    args = ap.parse_args()

    bunch = load_breast_cancer()
    # scikit-learn codes malignant as 0
    labels = 1 - bunch.target
    write_wdbc_csv(args.output, bunch.data, labels, header=not args.no_header)
    print(f"wrote {len(labels)} rows to {args.output}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerate tests/fixtures/digits_8x8.csv.

Snapshot of the UCI "Optical Recognition of Handwritten Digits" test set
(1797 8x8 grayscale images, integer intensities 0-16) as shipped with
scikit-learn. Dev-time tool only; the package itself does not depend on
scikit-learn.
"""

from sklearn.datasets import load_digits


def main():
    digits = load_digits()
    rows = ["label," + ",".join(f"pixel_{i}" for i in range(64))]
    for label, pixels in zip(digits.target, digits.data):
        rows.append(str(int(label)) + "," + ",".join(str(int(v)) for v in pixels))
    with open("tests/fixtures/digits_8x8.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows) - 1} digits")


if __name__ == "__main__":
    main()

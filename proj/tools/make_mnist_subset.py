#!/usr/bin/env python3
"""Write the 5000-image MNIST sample bundled with mlxtend as an IDX pair.

Usage: make_mnist_subset.py OUT_DIR

Produces OUT_DIR/images-idx3-ubyte and OUT_DIR/labels-idx1-ubyte in the
canonical big-endian MNIST layout. The wheel is fetched through pip when
mlxtend is not importable.
"""
import gzip
import glob
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_csv_bytes():
    try:
        import mlxtend.data  # noqa: F401
        path = os.path.join(os.path.dirname(mlxtend.data.__file__), "data", "mnist_5k.csv.gz")
        with open(path, "rb") as f:
            return gzip.decompress(f.read())
    except ImportError:
        pass
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                               "-q", "-d", tmp, "mlxtend"])
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            return gzip.decompress(z.read(CSV_MEMBER))


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    out = sys.argv[1]
    os.makedirs(out, exist_ok=True)
    rows = [line.split(",") for line in read_csv_bytes().decode().strip().split("\n")]
    pixels = bytearray()
    labels = bytearray()
    for r in rows:
        pixels.extend(int(float(v)) for v in r[:-1])
        labels.append(int(float(r[-1])))
    with open(os.path.join(out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        f.write(pixels)
    with open(os.path.join(out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(labels)
    print(f"wrote {len(rows)} images to {out}")


if __name__ == "__main__":
    main()

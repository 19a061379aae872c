"""Reading and writing datasets: numeric CSV and the IDX format used by MNIST."""

import csv
import gzip
import struct

import numpy as np

from .errors import BadMagic, CountMismatch, ParseError, RaggedRows, TruncatedFile
from .matrixcore import DataMatrix, as_matrix

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def load_csv(path, header=False, label_column=False):
    """Read a rectangular numeric CSV.

    Args:
        path: file to read.
        header: skip the first row.
        label_column: treat the last column as integer labels.

    Returns:
        ``(DataMatrix, labels)``; ``labels`` is None unless requested.
    """
    rows = []
    width = None
    with open(path, newline="") as f:
        for lineno, record in enumerate(csv.reader(f), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise RaggedRows(f"row {lineno} has {len(record)} fields, expected {width}")
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"not a number: {cell!r}", row=lineno, column=col) from None
            rows.append(values)
    if not rows:
        raise ParseError("no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    labels = None
    if label_column:
        if arr.shape[1] < 2:
            raise ParseError("label column requested but only one column present")
        raw = arr[:, -1]
        if not np.all(raw == np.round(raw)):
            bad = int(np.flatnonzero(raw != np.round(raw))[0])
            raise ParseError("label is not an integer", row=bad + 1 + int(header), column=arr.shape[1])
        labels = raw.astype(np.int64)
        arr = arr[:, :-1]
    return DataMatrix(arr), labels


def write_csv(path, V, labels=None, header=None):
    """Write a matrix (and optional trailing label column) losslessly."""
    X = as_matrix(V).data
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for i, row in enumerate(X):
            cells = [repr(float(x)) for x in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            w.writerow(cells)


def load_labels(path):
    """One integer label per line (a CSV's last column also works)."""
    out = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            cell = line.split(",")[-1]
            try:
                out.append(int(float(cell)))
            except ValueError:
                raise ParseError(f"not a label: {cell!r}", row=lineno) from None
    return np.asarray(out, dtype=np.int64)


def write_labels(path, labels):
    with open(path, "w") as f:
        for x in labels:
            f.write(f"{int(x)}\n")


def _open(path):
    return gzip.open(path, "rb") if str(path).endswith(".gz") else open(path, "rb")


def _read_idx(path, expected_magic):
    with _open(path) as f:
        blob = f.read()
    if len(blob) < 4:
        raise TruncatedFile(f"{path}: missing header")
    (magic,) = struct.unpack(">I", blob[:4])
    if magic != expected_magic:
        raise BadMagic(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    head = 4 + 4 * ndim
    if len(blob) < head:
        raise TruncatedFile(f"{path}: header cut short")
    dims = struct.unpack(f">{ndim}I", blob[4:head])
    need = int(np.prod(dims))
    if len(blob) - head < need:
        raise TruncatedFile(f"{path}: expected {need} bytes of data, found {len(blob) - head}")
    data = np.frombuffer(blob, dtype=np.uint8, count=need, offset=head)
    return data.reshape(dims)


def load_idx(images_path, labels_path):
    """Read an IDX image tensor and its label vector.

    Images are flattened to one row per item (784 columns for 28x28).

    Raises:
        BadMagic: wrong magic number in either file.
        TruncatedFile: fewer bytes than the header promises.
        CountMismatch: item counts of the two files differ.
    """
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatch(f"{images.shape[0]} images but {labels.shape[0]} labels")
    flat = images.reshape(images.shape[0], -1).astype(np.float64)
    return DataMatrix(flat), labels.astype(np.int64)


def write_idx(images_path, labels_path, images, labels):
    """Write a ``(N, rows, cols)`` uint8 tensor and its labels in IDX format."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">I", IDX_IMAGES_MAGIC))
        f.write(struct.pack(">3I", *images.shape))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())

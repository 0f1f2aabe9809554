"""Binary parameter files.

Layout (little endian):
    magic "DPLACPF1" | u32 version | u32 n_tensors |
    per tensor: u16 name_len | name utf-8 | u8 ndim | u64 * ndim dims |
                float64 * prod(dims) data |
    sha256 over all preceding bytes (32 bytes)

Round-trips are bit-exact for float64 payloads.
"""

import hashlib
import struct

import numpy as np

MAGIC = b"DPLACPF1"
VERSION = 1


class ParamFileError(IOError):
    pass


def save_arrays(path, arrays):
    """Write an ordered name -> float64 ndarray map."""
    chunks = [MAGIC, struct.pack("<II", VERSION, len(arrays))]
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        nb = name.encode("utf-8")
        if len(nb) > 0xFFFF:
            raise ParamFileError(f"tensor name too long: {name!r}")
        chunks.append(struct.pack("<H", len(nb)))
        chunks.append(nb)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape) if arr.ndim else b"")
        chunks.append(arr.tobytes(order="C"))
    body = b"".join(chunks)
    digest = hashlib.sha256(body).digest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(digest)


def load_arrays(path):
    """Read a parameter file back into an ordered name -> ndarray map."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 8 + 32:
        raise ParamFileError("file truncated: shorter than header + checksum")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ParamFileError("checksum mismatch: file corrupt or truncated")
    if body[: len(MAGIC)] != MAGIC:
        raise ParamFileError("bad magic bytes: not a parameter file")
    off = len(MAGIC)
    version, count = struct.unpack_from("<II", body, off)
    off += 8
    if version != VERSION:
        raise ParamFileError(f"unsupported format version {version}")
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", body, off)
        off += 2
        name = body[off : off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<B", body, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}Q", body, off) if ndim else ()
        off += 8 * ndim
        n = 1
        for d in shape:
            n *= d
        arr = np.frombuffer(body, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        out[name] = arr.astype(np.float64)  # owned, writable copy
    if off != len(body):
        raise ParamFileError("trailing bytes after last tensor")
    return out


def save_params(path, params, extra=None):
    """Persist a ParamSet (plus optional extra named arrays)."""
    arrays = dict(params.arrays())
    if extra:
        for k, v in extra.items():
            if k in arrays:
                raise ParamFileError(f"extra tensor name collides with parameter: {k!r}")
            arrays[k] = np.asarray(v, dtype=np.float64)
    save_arrays(path, arrays)


def load_params(path, params):
    """Load values into an existing ParamSet; returns leftover extras."""
    arrays = load_arrays(path)
    for name, p in params.items():
        if name not in arrays:
            raise ParamFileError(f"missing tensor {name!r} in {path}")
        if arrays[name].shape != p.value.shape:
            raise ParamFileError(
                f"tensor {name!r}: stored shape {arrays[name].shape} != expected {p.value.shape}"
            )
        p.value[...] = arrays[name]
    return {k: v for k, v in arrays.items() if k not in params._params}

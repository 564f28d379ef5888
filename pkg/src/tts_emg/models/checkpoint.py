"""Network checkpoint files.

Layout: ``b"TTSCK"``, a format-version byte, a little-endian uint32 header
length, a UTF-8 JSON header (architecture, training config, seed, parameter
names, extra metadata), then one tensor dump per parameter in header order.
"""

import json
import struct

import numpy as np

from ..errors import DataFormatError
from ..nn import dump_tensor, load_tensor
from .architectures import ArchitectureSpec, build_network

MAGIC = b"TTSCK"
FORMAT_VERSION = 1


def checkpoint_bytes(network, train_config=None, extra=None):
    header = {
        "architecture": network.architecture.to_dict(),
        "architecture_id": network.architecture.name,
        "seed": network.seed,
        "dtype": str(network.dtype),
        "params": [p.name for p in network.params],
        "train_config": train_config,
        "extra": extra or {},
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<BI", FORMAT_VERSION, len(raw)), raw]
    parts.extend(dump_tensor(p.value) for p in network.params)
    return b"".join(parts)


def save_checkpoint(path, network, train_config=None, extra=None):
    data = checkpoint_bytes(network, train_config, extra)
    with open(path, "wb") as fh:
        fh.write(data)


def load_checkpoint(path):
    """Return ``(network, header)``."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:len(MAGIC)] != MAGIC:
        raise DataFormatError("not a checkpoint file", path)
    version, hlen = struct.unpack_from("<BI", buf, len(MAGIC))
    if version != FORMAT_VERSION:
        raise DataFormatError(f"unsupported checkpoint version {version}", path)
    pos = len(MAGIC) + 5
    header = json.loads(buf[pos:pos + hlen].decode("utf-8"))
    pos += hlen
    spec = ArchitectureSpec.from_dict(header["architecture"])
    net = build_network(spec, seed=header["seed"], dtype=np.dtype(header["dtype"]), zero_init=True)
    params = net.params
    if [p.name for p in params] != header["params"]:
        raise DataFormatError("parameter names do not match architecture", path)
    for p in params:
        arr, pos = load_tensor(buf, pos)
        if arr.shape != p.value.shape:
            raise DataFormatError(f"{p.name}: stored shape {arr.shape} != {p.value.shape}", path)
        p.value[...] = arr
    return net, header

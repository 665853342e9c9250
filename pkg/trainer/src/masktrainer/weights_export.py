"""Writer for the inference engine's binary weights container.

Layout (restated from the interface contract, not imported from the engine):
8-byte magic ``GRUPF\\x00\\x001``, little-endian uint32 header length, a JSON
header carrying dims / gate order / log-feature epsilon / a tensor manifest,
then row-major little-endian float32 tensors at the manifest offsets
(relative to the start of the data section). Normalization statistics ride
along as ordinary tensors, so the file fully determines inference.
"""

import json
import struct

import numpy as np

MAGIC = b"GRUPF\x00\x001"
FORMAT_VERSION = 1
GATE_ORDER = "reset,update,candidate"
LOG_EPSILON = 1e-10


def _tensor_entries(model, norm_mean, norm_std):
    state = {k: v.detach().cpu().numpy() for k, v in model.state_dict().items()}
    entries = []
    for layer in range(model.gru.num_layers):
        entries += [
            (f"layer{layer}.weight_ih", state[f"gru.weight_ih_l{layer}"]),
            (f"layer{layer}.weight_hh", state[f"gru.weight_hh_l{layer}"]),
            (f"layer{layer}.bias_ih", state[f"gru.bias_ih_l{layer}"]),
            (f"layer{layer}.bias_hh", state[f"gru.bias_hh_l{layer}"]),
        ]
    entries += [
        ("head.weight", state["head.weight"]),
        ("head.bias", state["head.bias"]),
        ("norm.mean", np.asarray(norm_mean)),
        ("norm.std", np.asarray(norm_std)),
    ]
    return entries


def export_weights(model, norm_mean, norm_std, path):
    """Write the model plus feature-normalization statistics to `path`."""
    entries = _tensor_entries(model, norm_mean, norm_std)
    manifest = []
    offset = 0
    for name, tensor in entries:
        manifest.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        offset += tensor.size * 4
    header = {
        "version": FORMAT_VERSION,
        "input_dim": model.gru.input_size,
        "hidden_dim": model.gru.hidden_size,
        "num_layers": model.gru.num_layers,
        "output_dim": model.head.out_features,
        "epsilon": LOG_EPSILON,
        "gate_order": GATE_ORDER,
        "tensors": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for _, tensor in entries:
            f.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def read_exported(path):
    """Read back an exported file as {tensor name: array} plus the header."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        (header_len,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(header_len))
        data = f.read()
    tensors = {}
    for entry in header["tensors"]:
        count = int(np.prod(entry["shape"]))
        tensors[entry["name"]] = np.frombuffer(
            data, dtype="<f4", count=count, offset=entry["offset"]
        ).reshape(entry["shape"]).copy()
    return header, tensors

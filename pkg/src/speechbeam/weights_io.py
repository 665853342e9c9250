"""Portable binary container for the GRU postfilter parameters.

Layout: 8-byte magic, little-endian uint32 header length, JSON header, then
raw float32 little-endian tensors, row-major, at the offsets listed in the
header's tensor manifest (offsets relative to the start of the data section).
Feature-normalization mean/std are ordinary tensors in the manifest, so a
weights file is fully self-contained for inference.

Gate layout in every (3H, .) recurrent tensor: reset | update | candidate.
"""

import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import InvalidWeightsError

MAGIC = b"GRUPF\x00\x001"
FORMAT_VERSION = 1
GATE_ORDER = "reset,update,candidate"
LOG_EPSILON = 1e-10


@dataclass
class GruPostfilterWeights:
    """All parameters of the 2-layer GRU + linear + sigmoid mask estimator."""

    weight_ih: list  # per layer: (3H, input) float32
    weight_hh: list  # per layer: (3H, H) float32
    bias_ih: list  # per layer: (3H,) float32
    bias_hh: list  # per layer: (3H,) float32
    head_weight: np.ndarray  # (output, H) float32
    head_bias: np.ndarray  # (output,) float32
    norm_mean: np.ndarray  # (input,) float32
    norm_std: np.ndarray  # (input,) float32
    epsilon: float = LOG_EPSILON

    def __post_init__(self):
        self.validate()

    @property
    def num_layers(self):
        return len(self.weight_ih)

    @property
    def input_dim(self):
        return self.weight_ih[0].shape[1]

    @property
    def hidden_dim(self):
        return self.weight_hh[0].shape[1]

    @property
    def output_dim(self):
        return self.head_weight.shape[0]

    def validate(self):
        if not self.weight_ih or len({len(t) for t in
                                      (self.weight_ih, self.weight_hh,
                                       self.bias_ih, self.bias_hh)}) != 1:
            raise InvalidWeightsError("per-layer tensor lists must be non-empty and equal length")
        hidden = self.weight_hh[0].shape[1]
        in_dim = self.weight_ih[0].shape[1]
        for layer in range(self.num_layers):
            expect_in = in_dim if layer == 0 else hidden
            checks = [
                (f"layer{layer}.weight_ih", self.weight_ih[layer], (3 * hidden, expect_in)),
                (f"layer{layer}.weight_hh", self.weight_hh[layer], (3 * hidden, hidden)),
                (f"layer{layer}.bias_ih", self.bias_ih[layer], (3 * hidden,)),
                (f"layer{layer}.bias_hh", self.bias_hh[layer], (3 * hidden,)),
            ]
            for name, tensor, shape in checks:
                if tensor.shape != shape:
                    raise InvalidWeightsError(f"{name}: expected shape {shape}, got {tensor.shape}")
        if self.head_weight.shape != (self.output_dim, hidden):
            raise InvalidWeightsError(
                f"head.weight: expected ({self.output_dim}, {hidden}), got {self.head_weight.shape}"
            )
        if self.head_bias.shape != (self.output_dim,):
            raise InvalidWeightsError(f"head.bias: expected ({self.output_dim},)")
        if self.norm_mean.shape != (in_dim,) or self.norm_std.shape != (in_dim,):
            raise InvalidWeightsError(f"norm.mean/std must have shape ({in_dim},)")
        if np.any(self.norm_std <= 0):
            raise InvalidWeightsError("norm.std must be strictly positive")
        for name, tensor in self._manifest():
            if not np.all(np.isfinite(tensor)):
                raise InvalidWeightsError(f"{name}: non-finite values")

    def _manifest(self):
        entries = []
        for layer in range(self.num_layers):
            entries += [
                (f"layer{layer}.weight_ih", self.weight_ih[layer]),
                (f"layer{layer}.weight_hh", self.weight_hh[layer]),
                (f"layer{layer}.bias_ih", self.bias_ih[layer]),
                (f"layer{layer}.bias_hh", self.bias_hh[layer]),
            ]
        entries += [
            ("head.weight", self.head_weight),
            ("head.bias", self.head_bias),
            ("norm.mean", self.norm_mean),
            ("norm.std", self.norm_std),
        ]
        return entries

    @classmethod
    def zeros(cls, input_dim=514, hidden_dim=512, num_layers=2, output_dim=257):
        """All-zero parameters with unit normalization; mask comes out 0.5."""
        f32 = np.float32
        return cls(
            weight_ih=[
                np.zeros((3 * hidden_dim, input_dim if l == 0 else hidden_dim), f32)
                for l in range(num_layers)
            ],
            weight_hh=[np.zeros((3 * hidden_dim, hidden_dim), f32) for _ in range(num_layers)],
            bias_ih=[np.zeros(3 * hidden_dim, f32) for _ in range(num_layers)],
            bias_hh=[np.zeros(3 * hidden_dim, f32) for _ in range(num_layers)],
            head_weight=np.zeros((output_dim, hidden_dim), f32),
            head_bias=np.zeros(output_dim, f32),
            norm_mean=np.zeros(input_dim, f32),
            norm_std=np.ones(input_dim, f32),
        )


def save_weights(weights, path):
    entries = weights._manifest()
    manifest = []
    offset = 0
    for name, tensor in entries:
        manifest.append({"name": name, "shape": list(tensor.shape), "offset": offset})
        offset += tensor.size * 4
    header = {
        "version": FORMAT_VERSION,
        "input_dim": weights.input_dim,
        "hidden_dim": weights.hidden_dim,
        "num_layers": weights.num_layers,
        "output_dim": weights.output_dim,
        "epsilon": weights.epsilon,
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


def _read_exact(f, n, what):
    data = f.read(n)
    if len(data) != n:
        raise InvalidWeightsError(f"truncated file while reading {what}")
    return data


def load_weights(path):
    with open(path, "rb") as f:
        magic = _read_exact(f, len(MAGIC), "magic")
        if magic != MAGIC:
            raise InvalidWeightsError(f"bad magic {magic!r}")
        (header_len,) = struct.unpack("<I", _read_exact(f, 4, "header length"))
        try:
            header = json.loads(_read_exact(f, header_len, "header"))
        except json.JSONDecodeError as exc:
            raise InvalidWeightsError(f"header is not valid JSON: {exc}") from exc
        if header.get("version") != FORMAT_VERSION:
            raise InvalidWeightsError(f"unsupported version {header.get('version')}")
        if header.get("gate_order") != GATE_ORDER:
            raise InvalidWeightsError(f"unsupported gate order {header.get('gate_order')!r}")
        data = f.read()

    tensors = {}
    for entry in header["tensors"]:
        name, shape, offset = entry["name"], tuple(entry["shape"]), entry["offset"]
        nbytes = int(np.prod(shape)) * 4
        if offset + nbytes > len(data):
            raise InvalidWeightsError(f"{name}: tensor data truncated")
        tensors[name] = np.frombuffer(
            data, dtype="<f4", count=int(np.prod(shape)), offset=offset
        ).reshape(shape).copy()

    num_layers = header["num_layers"]
    try:
        weights = GruPostfilterWeights(
            weight_ih=[tensors[f"layer{l}.weight_ih"] for l in range(num_layers)],
            weight_hh=[tensors[f"layer{l}.weight_hh"] for l in range(num_layers)],
            bias_ih=[tensors[f"layer{l}.bias_ih"] for l in range(num_layers)],
            bias_hh=[tensors[f"layer{l}.bias_hh"] for l in range(num_layers)],
            head_weight=tensors["head.weight"],
            head_bias=tensors["head.bias"],
            norm_mean=tensors["norm.mean"],
            norm_std=tensors["norm.std"],
            epsilon=float(header.get("epsilon", LOG_EPSILON)),
        )
    except KeyError as exc:
        raise InvalidWeightsError(f"missing tensor {exc}") from exc
    for field, expect in (
        ("input_dim", weights.input_dim),
        ("hidden_dim", weights.hidden_dim),
        ("output_dim", weights.output_dim),
    ):
        if header[field] != expect:
            raise InvalidWeightsError(
                f"header {field}={header[field]} disagrees with tensors ({expect})"
            )
    return weights

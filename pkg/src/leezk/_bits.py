"""Fixed-width little-endian bit packing of nonnegative integers."""
import numpy as np


def width_for(count: int) -> int:
    """Bits needed for the values 0..count-1 (at least one)."""
    return max(1, int(count - 1).bit_length())


def packed_size(count: int, width: int) -> int:
    return (count * width + 7) // 8


def pack(values, width: int) -> bytes:
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    if values.size and (values.min() < 0 or values.max() >= 1 << width):
        raise ValueError(f"values do not fit in {width} bits")
    bits = (values[:, None] >> np.arange(width, dtype=np.int64)) & 1
    return np.packbits(bits.astype(np.uint8).reshape(-1), bitorder="little").tobytes()


def unpack(data: bytes, count: int, width: int) -> np.ndarray:
    if len(data) != packed_size(count, width):
        raise ValueError(f"expected {packed_size(count, width)} packed bytes, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if bits[count * width:].any():
        raise ValueError("nonzero padding bits")  # keep the encoding canonical
    bits = bits[: count * width].reshape(count, width).astype(np.int64)
    return bits @ (np.int64(1) << np.arange(width, dtype=np.int64))

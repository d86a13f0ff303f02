"""
Quantizing approach directions on a Fibonacci sphere
=====================================================

Approach directions are turned into class labels by snapping them to the
nearest point of a Fibonacci lattice. This script builds the lattice, checks
how evenly it covers the sphere and measures the worst quantization error.
"""
import numpy as np

from simgrasp.codec import build_lattice, decode_class, encode_direction

# The lattice is a pure function of its size; 800 classes is the default.
lattice = build_lattice(800)
print("first three directions:\n", lattice.vectors[:3].round(4))

# A well spread lattice has its centroid at the origin.
print("norm of the mean vector:", np.linalg.norm(lattice.vectors.mean(axis=0)))

# Decoding a class and encoding it again gives the class back.
assert all(encode_direction(lattice, decode_class(lattice, k)) == k for k in range(800))

# Random directions land in their nearest class. The angle to that class
# vector is the quantization error; its maximum over many samples
# approaches the covering radius of the lattice.
rng = np.random.default_rng(0)
v = rng.normal(size=(100_000, 3))
v /= np.linalg.norm(v, axis=1, keepdims=True)
k = encode_direction(lattice, v)
err = np.degrees(np.arccos(np.clip(np.einsum("ij,ij->i", v, lattice.vectors[k]), -1, 1)))
print(f"quantization error: mean {err.mean():.2f} deg, max {err.max():.2f} deg")

# Class occupancy is close to uniform.
counts = np.bincount(k, minlength=800)
print(f"samples per class: min {counts.min()}, max {counts.max()}, expected {100_000 / 800:.0f}")

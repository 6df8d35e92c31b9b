"""Structural identities of the layered Gibbs view, checked numerically.

Three checks on a randomly initialized network:

1. The output head rewrites as a product of experts: log softmax of the
   logits equals the log of a normalized product of per-neuron expert
   factors raised to the head weights. Both sides are evaluated separately;
   the residual is floating-point noise.

2. The layered joint measure (head x hidden-2 x hidden-1 factor product)
   marginalizes by brute-force triple summation to exactly the head's
   class distribution, and its normalizer collapses to sum(exp(logits)).

3. The hidden stack is first-order in its parameters: the residual of the
   Jacobian expansion, divided by the step norm, shrinks linearly as a
   gradient step is halved (away from ReLU kinks).

Run from the repository root:  python demos/05_structural_identities.py
"""
import math

import numpy as np

from pacmlp import gibbs, mlp, numerics, prng

params = mlp.init_params(mlp.MlpConfig(6, 5, 4, 3), seed=3)
x = prng.normal(42, 6)
trace = mlp.forward(params, x)

res = gibbs.poe_check(params, trace.f2)
print(f"product-of-experts residual per class: {np.array2string(res.per_class, precision=2)}")
print(f"max |log lhs - log rhs| = {res.max_abs_log_residual:.2e}\n")

q1, q2 = numerics.softmax(trace.f1), numerics.softmax(trace.f2)
joint = np.einsum("l,k,t->lkt", np.exp(trace.gy), q2, q1)
z = joint.sum()
marginal = joint.sum(axis=(1, 2)) / z
print(f"brute-force normalizer  {z:.12f}")
print(f"sum(exp(logits))        {np.exp(trace.gy).sum():.12f}")
print(f"max |marginal - qy|     {np.abs(marginal - trace.qy).max():.2e}\n")

grads = mlp.backward(params, trace, 0)
print("linearization residual under a halving gradient step:")
alpha = 0.05
for _ in range(6):
    stepped = mlp.MlpParams(
        params.w1 - alpha * grads.w1, params.b1 - alpha * grads.b1,
        params.w2 - alpha * grads.w2, params.b2 - alpha * grads.b2,
        params.w3, params.by,
    )
    r = gibbs.linearization_residual(params, stepped, x)
    print(f"  step {alpha:8.5f}  residual/||step|| = {r:.3e}")
    alpha /= 2

loss = mlp.cross_entropy_loss(trace, 0)
split = gibbs.energy(trace, 0) + gibbs.log_partition(trace)
print(f"\nloss {loss:.12f} = energy + log Z {split:.12f} (gap {abs(loss - split):.1e})")
print(f"uniform-logit sanity: log partition of zero logits over 3 classes = {math.log(3.0):.6f}")

# Copyright 2026 The FedMeZO Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent re-evaluation of the closed-form calculators.

Uses exact rational arithmetic (fractions) wherever the formula allows and
mpmath at 50 digits for the square roots and 3/2 powers, then writes
data/goldens.json. The C++ library is checked against this file; nothing
here imports or calls the library.
"""
import json
import pathlib
from fractions import Fraction as F

import mpmath

mpmath.mp.dps = 50
M64 = (1 << 64) - 1


def mix64(x):
    x &= M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & M64
    x ^= x >> 31
    return x


def derive_seed(m, t, i, k):
    h = mix64(m + 0x9E3779B97F4A7C15)
    h = mix64(h ^ ((t + 0x632BE59BD9B4E019) & M64))
    h = mix64(h ^ ((i + 0x8CB92BA72F3D8DD7) & M64))
    h = mix64(h ^ ((k + 0xD6E8FEB86659FD93) & M64))
    return h


def gamma_zeta(d, r, n):
    d, r, n = F(d), F(r), F(n)
    core = d * r + d - 2
    return core / (n * (d + 2)), (d + 2) * n * n / (core * (d + n - 1))


def lr_bound(H, L, cg, d, N):
    H, L, cg, d, N = map(mpmath.mpf, (H, L, cg, d, N))
    return min(1 / (3 * H * L * mpmath.sqrt(cg * d)), N / (3 * H * L * cg), 1 / H**2)


def constants(p):
    g, z = gamma_zeta(p["d"], p["r"], p["n"])
    d, N = F(p["d"]), F(p["N"])
    Gamma = (d - z * g) / (d * g)
    Gamma_t = (d - N * g * z) / (d * g * N)
    cht = F(p["c_h"]) + N
    sig_t = 3 * F(p["c_g"]) * F(p["sigma_h"]) ** 2 + F(p["sigma_g"]) ** 2
    return g, z, Gamma, Gamma_t, cht, sig_t


def iid(p, eta):
    g, z, G, _, _, _ = constants(p)
    f = lambda k: F(str(p[k]))
    eta = F(str(eta))
    return ((f("f0") - f("f_star")) / (2 * eta * f("T") * G)
            + f("sigma_g") ** 2 * z * f("L") / (f("N") * f("H") * f("d") * G)
            + z * f("mu") ** 2 * f("L") ** 3 / (4 * f("N") * f("H") * G))


def noniid(p, eta):
    g, z, _, Gt, cht, sig_t = constants({k: F(str(v)) for k, v in p.items()})
    f = lambda k: F(str(p[k]))
    eta = F(str(eta))
    Gc = Gt * cht
    return ((f("f0") - f("f_star")) / (2 * Gc * eta * f("T"))
            + sig_t * z * f("L") / (Gc * f("N") * f("H") * f("d"))
            + z * f("mu") ** 2 * f("L") ** 3 / (4 * Gc * f("N") * f("H"))
            - f("sigma_h") ** 2 / (Gc * g * f("N")))


def rate_scaling(r, N, H, T, cht=1):
    return mpmath.mpf(r) ** mpmath.mpf(1.5) / mpmath.sqrt(mpmath.mpf(cht) * N * H * T)


def num(x):
    return float(x) if not isinstance(x, mpmath.mpf) else float(mpmath.nstr(x, 30))


base = dict(d=100, r=4, n=1, N=4, H=30, T=500, L=1, c_g=1, sigma_g=0.1, c_h=0, sigma_h=0,
            mu=1e-3, f0=1, f_star=0)
non = dict(base, c_h=0.5, sigma_h=0.2)

full_bytes_gib = F(3430605128 * 2, 1 << 30)
out = {
    "derive_seed": [
        {"master": 42, "round": 1, "client": 2, "step": 3, "value": str(derive_seed(42, 1, 2, 3))},
        {"master": 0, "round": 0, "client": 0, "step": 0, "value": str(derive_seed(0, 0, 0, 0))},
    ],
    "gamma_zeta": [
        {"d": d, "r": r, "n": n, "gamma": float(g), "zeta": float(z)}
        for (d, r, n) in [(10, 2, 1), (2, 1, 1), (100, 4, 1), (50, 3, 2)]
        for (g, z) in [gamma_zeta(d, r, n)]
    ],
    "lr_bound": [
        {"H": H, "L": L, "c_g": cg, "d": d, "N": N, "value": num(lr_bound(H, L, cg, d, N))}
        for (H, L, cg, d, N) in [(30, 1, 1, 100, 4), (30, 0.9, 25, 50, 4), (10, 2, 3, 1000, 8), (1, 1, 1, 4, 1)]
    ],
    "iid_rate_bound": {"inputs": base, "eta": 1e-3, "value": float(iid(base, 1e-3))},
    "noniid_rate_bound": {"inputs": non, "eta": 1e-3, "value": float(noniid(non, 1e-3))},
    "rate_scaling": [
        {"r": 2, "N": 4, "H": 30, "T": 500, "value": num(rate_scaling(2, 4, 30, 500))},
        {"r": 4, "N": 4, "H": 30, "T": 500, "c_h_tilde": 4.5,
         "value": num(rate_scaling(4, 4, 30, 500, mpmath.mpf(4.5)))},
    ],
    "comm_cost": {
        "lora_params": 42598400, "bytes_per_param": 2, "lora_bytes": 42598400 * 2,
        "lora_mib": float(F(42598400 * 2, 1 << 20)),
        "quoted_full_gib": 6.39,
        "full_params_back_derived": 3430605128,
        "full_gib_from_back_derived": float(full_bytes_gib),
        "spec_full_params": 3426473000,
        "spec_full_gib": float(F(3426473000 * 2, 1 << 30)),
    },
}
path = pathlib.Path(__file__).resolve().parents[2] / "data" / "goldens.json"
path.write_text(json.dumps(out, indent=2) + "\n")
print(path)

"""Generate the bundled desk-scale LMS tables (crates/core/data/*.csv).

The tables are CDC-shaped but illustrative: yearly anchor values for L, M and S
are interpolated monthly with a monotone cubic (PCHIP) interpolant. They are
intended for synthetic validation, not clinical use.
"""
import numpy as np
from scipy.interpolate import PchipInterpolator

AGES = np.arange(2, 21)

ANCHORS = {
    "weight": {
        1: dict(
            M=[12.74, 14.34, 16.34, 18.44, 20.68, 23.06, 25.64, 28.55, 31.88, 35.64,
               39.99, 45.10, 50.70, 55.96, 60.66, 64.48, 67.20, 69.04, 70.60],
            L=[-0.22, -0.55, -0.85, -1.10, -1.28, -1.38, -1.42, -1.40, -1.34, -1.24,
               -1.10, -0.95, -0.80, -0.67, -0.55, -0.45, -0.36, -0.28, -0.20],
            S=[0.108, 0.110, 0.115, 0.122, 0.131, 0.141, 0.152, 0.162, 0.170, 0.175,
               0.177, 0.175, 0.170, 0.165, 0.160, 0.157, 0.154, 0.152, 0.150],
        ),
        2: dict(
            M=[12.13, 13.94, 15.94, 17.94, 20.24, 22.82, 25.62, 28.74, 32.56, 36.90,
               41.50, 45.78, 49.38, 52.10, 54.00, 55.28, 56.20, 56.98, 57.68],
            L=[-0.20, -0.50, -0.80, -1.02, -1.18, -1.27, -1.30, -1.28, -1.22, -1.12,
               -1.00, -0.88, -0.76, -0.65, -0.56, -0.48, -0.41, -0.35, -0.30],
            S=[0.115, 0.118, 0.124, 0.132, 0.142, 0.153, 0.163, 0.172, 0.178, 0.180,
               0.179, 0.176, 0.172, 0.169, 0.167, 0.166, 0.166, 0.166, 0.166],
        ),
    },
    "stature": {
        1: dict(
            M=[86.45, 95.27, 102.47, 109.19, 115.53, 121.72, 127.35, 132.62, 137.84, 143.11,
               149.07, 156.02, 163.21, 169.02, 172.92, 175.18, 176.18, 176.68, 176.98],
            L=[1.00, 1.00, 0.98, 0.96, 0.94, 0.92, 0.90, 0.90, 0.92, 0.96,
               1.02, 1.10, 1.16, 1.20, 1.22, 1.22, 1.20, 1.18, 1.16],
            S=[0.0405, 0.0412, 0.0418, 0.0422, 0.0424, 0.0427, 0.0432, 0.0438, 0.0446, 0.0455,
               0.0464, 0.0468, 0.0460, 0.0440, 0.0418, 0.0405, 0.0399, 0.0397, 0.0396],
        ),
        2: dict(
            M=[85.13, 94.18, 101.58, 108.37, 114.99, 121.03, 126.96, 132.65, 138.32, 144.82,
               151.28, 156.67, 159.78, 161.66, 162.48, 162.96, 163.26, 163.46, 163.66],
            L=[1.00, 0.98, 0.96, 0.94, 0.92, 0.90, 0.90, 0.92, 0.96, 1.02,
               1.08, 1.12, 1.14, 1.14, 1.13, 1.12, 1.11, 1.10, 1.10],
            S=[0.0410, 0.0418, 0.0424, 0.0428, 0.0432, 0.0436, 0.0442, 0.0449, 0.0455, 0.0456,
               0.0446, 0.0428, 0.0410, 0.0398, 0.0393, 0.0391, 0.0390, 0.0390, 0.0390],
        ),
    },
    "bmi": {
        1: dict(
            M=[16.58, 16.02, 15.65, 15.43, 15.39, 15.55, 15.86, 16.29, 16.82, 17.42,
               18.06, 18.72, 19.39, 20.05, 20.70, 21.32, 21.90, 22.44, 22.94],
            L=[-2.00, -2.10, -2.35, -2.65, -2.90, -3.05, -3.10, -3.05, -2.90, -2.70,
               -2.48, -2.26, -2.06, -1.88, -1.72, -1.58, -1.46, -1.35, -1.26],
            S=[0.081, 0.079, 0.080, 0.085, 0.093, 0.103, 0.113, 0.122, 0.130, 0.135,
               0.138, 0.139, 0.138, 0.136, 0.134, 0.132, 0.131, 0.130, 0.130],
        ),
        2: dict(
            M=[16.42, 15.74, 15.34, 15.18, 15.21, 15.46, 15.90, 16.47, 17.12, 17.80,
               18.48, 19.14, 19.76, 20.32, 20.81, 21.22, 21.56, 21.85, 22.10],
            L=[-1.90, -2.00, -2.20, -2.40, -2.55, -2.60, -2.55, -2.45, -2.30, -2.15,
               -2.00, -1.86, -1.74, -1.63, -1.54, -1.46, -1.40, -1.35, -1.31],
            S=[0.085, 0.086, 0.090, 0.098, 0.108, 0.119, 0.130, 0.139, 0.146, 0.150,
               0.152, 0.152, 0.151, 0.150, 0.149, 0.149, 0.149, 0.149, 0.150],
        ),
    },
}

months = np.arange(24.0, 240.5, 1.0)
for measure, by_sex in ANCHORS.items():
    lines = ["Sex,Agemos,L,M,S"]
    for sex in (1, 2):
        params = by_sex[sex]
        interp = {k: PchipInterpolator(AGES, np.array(v)) for k, v in params.items()}
        for m in months:
            age = m / 12.0
            l, mm, s = (float(interp[k](age)) for k in ("L", "M", "S"))
            lines.append(f"{sex},{m:.1f},{l:.6f},{mm:.5f},{s:.6f}")
    with open(f"crates/core/data/{measure}_for_age.csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")

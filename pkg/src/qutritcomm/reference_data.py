"""Recorded experimental runs and hardware encoding tables.

Plain tuples only, so every other module can import this one. Each run row is
``(inputs, counts)`` with counts in detector order D0, D1, D2.
"""

from fractions import Fraction

# Secret sharing: ((a0, a1, b0, b1, c0, c1), (D0, D1, D2)).
# The last two rows fail sifting; their outcome is random.
SECRET_SHARING_RUNS = (
    ((0, 0, 0, 0, 2, 0), (7, 5, 210)),
    ((1, 0, 0, 0, 1, 0), (7, 6, 261)),
    ((2, 0, 2, 1, 2, 2), (375, 15, 26)),
    ((0, 1, 2, 2, 1, 0), (391, 10, 29)),
    ((1, 1, 0, 1, 2, 1), (336, 7, 23)),
    ((2, 1, 1, 1, 1, 1), (7, 373, 22)),
    ((0, 2, 2, 0, 0, 1), (16, 13, 313)),
    ((1, 2, 2, 2, 2, 2), (19, 8, 248)),
    ((2, 2, 1, 0, 1, 1), (9, 284, 22)),
    ((1, 0, 0, 2, 2, 0), (102, 98, 94)),
    ((2, 2, 0, 0, 0, 0), (89, 75, 71)),
)

# Published QTER percentages for the rows above.
SECRET_SHARING_QTER_PCT = (
    "5.41", "4.74", "9.86", "9.07", "8.20", "7.21", "8.48", "9.82", "9.84",
    "65.31", "62.13",
)

DBA_RUNS = (
    ((0, 0, 1, 0, 1, 0), (16, 11, 337)),
    ((1, 0, 0, 0, 0, 0), (16, 320, 19)),
    ((2, 0, 1, 0, 0, 0), (347, 13, 20)),
    ((0, 1, 0, 1, 0, 1), (363, 13, 20)),
    ((1, 1, 1, 1, 0, 1), (11, 17, 333)),
    ((2, 1, 0, 1, 1, 1), (309, 9, 13)),
    ((0, 2, 1, 1, 0, 0), (7, 277, 19)),
    ((1, 2, 0, 2, 1, 2), (9, 18, 274)),
    ((2, 2, 1, 2, 0, 2), (300, 7, 26)),
)

DBA_QTER_PCT = ("7.42", "9.86", "8.68", "8.33", "7.76", "6.65", "8.58", "8.97", "9.91")

# CCP: ((S_a, S_b, S_c), T, (D0, D1, D2)).
CCP_RUNS = (
    ((0, 1, 8), 0, (350, 7, 28)),
    ((0, 2, 1), 1, (8, 284, 23)),
    ((1, 5, 0), 2, (14, 14, 255)),
    ((1, 6, 2), 0, (337, 5, 29)),
    ((2, 7, 3), 1, (13, 268, 16)),
    ((2, 0, 4), 2, (10, 2, 204)),
    ((3, 2, 4), 0, (302, 8, 22)),
    ((3, 1, 8), 1, (8, 358, 22)),
    ((4, 8, 3), 2, (10, 13, 269)),
    ((4, 5, 0), 0, (332, 12, 21)),
    ((5, 6, 1), 1, (21, 370, 19)),
    ((5, 4, 6), 2, (14, 18, 297)),
    ((6, 2, 1), 0, (298, 3, 28)),
    ((6, 8, 7), 1, (6, 297, 18)),
    ((7, 3, 5), 2, (6, 13, 232)),
    ((7, 0, 2), 0, (264, 12, 12)),
    ((8, 2, 2), 1, (7, 385, 31)),
    ((8, 8, 8), 2, (13, 11, 229)),
)

CCP_SUCCESS_PCT = (
    "90.91", "92.53", "90.11", "90.84", "90.24", "94.44", "90.96", "92.27", "92.12",
    "90.96", "90.24", "90.27", "90.30", "92.52", "92.43", "91.67", "90.40", "90.51",
)

# Zero-based CCP rows whose published success does not follow from their counts
# (counts give 90.16, 90.58 and 91.02).
CCP_INCONSISTENT_ROWS = (1, 12, 16)

# Mean QTER of the valid rows, in percent.
SECRET_SHARING_MEAN_QTER_PCT = 8.07
DBA_MEAN_QTER_PCT = 8.46

# Per-trigger dark count probabilities of detectors D0, D1, D2.
DARK_COUNT_PROBABILITIES = (5.9e-5, 2.8e-5, 20.5e-5)
DETECTOR_QUANTUM_EFFICIENCY = 0.20
TRIGGERS_PER_SETTING = 100_000
DETECTIONS_PER_SETTING = 400

# QTER threshold for secure qutrit key distribution.
SECURITY_THRESHOLD = 0.1595

OPTIMAL_CLASSICAL_SUCCESS = Fraction(7, 9)

# Encoding tables, angles in units of pi/9, basis order |0>, |1>, |2>.
# Secret sharing & DBA, keyed by (x0, x1): (distributor, relay).
SECRET_SHARING_ENCODING_NINTHS = {
    (0, 0): ((0, 0, 0), (0, 0, 0)),
    (0, 1): ((6, 12, 0), (0, 6, 12)),
    (0, 2): ((12, 6, 0), (0, 12, 6)),
    (1, 0): ((12, 0, 0), (0, 6, 6)),
    (1, 1): ((0, 12, 0), (0, 12, 0)),
    (1, 2): ((6, 6, 0), (0, 0, 12)),
    (2, 0): ((6, 0, 0), (0, 12, 12)),
    (2, 1): ((12, 12, 0), (0, 0, 6)),
    (2, 2): ((0, 6, 0), (0, 6, 0)),
}

# CCP, keyed by S: (distributor, relay).
CCP_ENCODING_NINTHS = {
    0: ((0, 0, 0), (0, 0, 0)),
    1: ((14, 16, 0), (0, 2, 4)),
    2: ((10, 14, 0), (0, 4, 8)),
    3: ((6, 12, 0), (0, 6, 12)),
    4: ((2, 10, 0), (0, 8, 16)),
    5: ((16, 8, 0), (0, 10, 2)),
    6: ((12, 6, 0), (0, 12, 6)),
    7: ((8, 4, 0), (0, 14, 10)),
    8: ((4, 2, 0), (0, 16, 14)),
}

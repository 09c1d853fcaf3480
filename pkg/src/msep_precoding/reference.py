"""Bundled reference SER curves for the K=2, M=5 Rayleigh benchmark.

Two scenarios are covered: QPSK data with QPSK transmit quantization, and
8-PSK data with 8-PSK quantization.  Each table maps a method name to
``{snr_db: ser}`` over the common grid.  The ``figure`` CLI command reruns
the benchmark and gates the cells listed in ``FIGURE_GATES`` against these
values within per-cell relative tolerance bands (looser at high SNR where
errors are rarer).
"""

SNR_GRID_DB = (-10.0, -7.5, -5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0)

QPSK_K2_M5 = {
    "MMDDT-Exhaustive": {
        -10.0: 0.6027847, -7.5: 0.55149115, -5.0: 0.48213305, -2.5: 0.3968015,
        0.0: 0.30209265, 2.5: 0.20431765, 5.0: 0.12072085, 7.5: 0.0624841,
        10.0: 0.02879335, 12.5: 0.01202765, 15.0: 0.0047456, 17.5: 0.00177115,
        20.0: 0.0005537,
    },
    "QMSEP-BnB": {
        -10.0: 0.58205675, -7.5: 0.5267677, -5.0: 0.45500015, -2.5: 0.37026935,
        0.0: 0.27950785, 2.5: 0.18738845, 5.0: 0.11016255, 7.5: 0.0566899,
        10.0: 0.02592775, 12.5: 0.0107689, 15.0: 0.0042282, 17.5: 0.00160975,
        20.0: 0.0005142,
    },
    "QMSEP-Exhaustive": {
        -10.0: 0.58205675, -7.5: 0.5267677, -5.0: 0.45500015, -2.5: 0.37026935,
        0.0: 0.27950785, 2.5: 0.18738845, 5.0: 0.11016255, 7.5: 0.0566899,
        10.0: 0.02592775, 12.5: 0.0107689, 15.0: 0.0042282, 17.5: 0.00160975,
        20.0: 0.0005142,
    },
    "UBMSEP-BnB": {
        -10.0: 0.5856534, -7.5: 0.5307211, -5.0: 0.4592322, -2.5: 0.37401485,
        0.0: 0.28145705, 2.5: 0.18826195, 5.0: 0.1105362, 7.5: 0.0567985,
        10.0: 0.02592775, 12.5: 0.01070925, 15.0: 0.004229, 17.5: 0.0016098,
        20.0: 0.0005142,
    },
    "UBMSEP-Exhaustive": {
        -10.0: 0.5858286, -7.5: 0.5308834, -5.0: 0.459246, -2.5: 0.37403085,
        0.0: 0.2815421, 2.5: 0.18826195, 5.0: 0.1105362, 7.5: 0.0567985,
        10.0: 0.02592775, 12.5: 0.01070925, 15.0: 0.004229, 17.5: 0.00160975,
        20.0: 0.0005142,
    },
}

PSK8_K2_M5 = {
    "MMDDT-Exhaustive": {
        -10.0: 0.78660475, -7.5: 0.7507495, -5.0: 0.69927275, -2.5: 0.63531675,
        0.0: 0.541805, 2.5: 0.43478225, 5.0: 0.3148385, 7.5: 0.2008715,
        10.0: 0.1095765, 12.5: 0.04892275, 15.0: 0.01898225, 17.5: 0.00656175,
        20.0: 0.00219525,
    },
    "UBMSEP-BnB": {
        -10.0: 0.772625, -7.5: 0.7323745, -5.0: 0.67583, -2.5: 0.60729225,
        0.0: 0.510703, 2.5: 0.40526425, 5.0: 0.2904175, 7.5: 0.183837,
        10.0: 0.1000565, 12.5: 0.04470775, 15.0: 0.01736, 17.5: 0.00600325,
        20.0: 0.00198775,
    },
    "UBMSEP-Exhaustive": {
        -10.0: 0.772587, -7.5: 0.73233725, -5.0: 0.6758475, -2.5: 0.60729725,
        0.0: 0.51066975, 2.5: 0.40517, 5.0: 0.29040575, 7.5: 0.183753,
        10.0: 0.100026, 12.5: 0.0446615, 15.0: 0.01736, 17.5: 0.00600325,
        20.0: 0.00198775,
    },
}

# figure name -> (scenario table, (alpha_s, alpha_x), gated cells)
# each gate is (method, snr_db, relative tolerance)
FIGURE_GATES = {
    "fig-qpsk-k2m5": (
        QPSK_K2_M5,
        (4, 4),
        (
            ("QMSEP-BnB", 0.0, 0.05),
            ("QMSEP-BnB", 10.0, 0.10),
            ("QMSEP-BnB", 15.0, 0.15),
            ("UBMSEP-BnB", 0.0, 0.05),
            ("UBMSEP-BnB", 10.0, 0.10),
            ("UBMSEP-BnB", 15.0, 0.15),
        ),
    ),
    "fig-8psk-k2m5": (
        PSK8_K2_M5,
        (8, 8),
        (
            ("UBMSEP-BnB", 0.0, 0.05),
            ("UBMSEP-BnB", 10.0, 0.10),
            ("UBMSEP-BnB", 20.0, 0.25),
        ),
    ),
}

# comparisons are skipped below this many user decisions per point
MIN_DECISIONS_FOR_COMPARISON = 200_000

"""STO-3G basis data for the elements this exporter supports.

Exponents and contraction coefficients are the standard published STO-3G
values; sp shells share exponents between the 2s and 2p contractions.
"""

# universal STO-3G contraction coefficients
_COEF_1S = (0.15432897, 0.53532814, 0.44463454)
_COEF_2S = (-0.09996723, 0.39951283, 0.70011547)
_COEF_2P = (0.15591627, 0.60768372, 0.39195739)

# element -> list of shells; each shell: (angular kind, exponents, coefficients)
BASIS = {
    "H": [
        ("s", (3.42525091, 0.62391373, 0.16885540), _COEF_1S),
    ],
    "O": [
        ("s", (130.7093200, 23.8088610, 6.4436083), _COEF_1S),
        ("s", (5.0331513, 1.1695961, 0.3803890), _COEF_2S),
        ("p", (5.0331513, 1.1695961, 0.3803890), _COEF_2P),
    ],
    "F": [
        ("s", (166.6791300, 30.3608120, 8.2168207), _COEF_1S),
        ("s", (6.4648032, 1.5022812, 0.4885885), _COEF_2S),
        ("p", (6.4648032, 1.5022812, 0.4885885), _COEF_2P),
    ],
}

CHARGES = {"H": 1, "O": 8, "F": 9}

ANGSTROM_TO_BOHR = 1.8897259886


def shells_for(symbols, coords_bohr):
    """Flatten per-atom shells into basis functions: (lmn, exps, coefs, center).

    p shells expand into the three Cartesian components.
    """
    functions = []
    for symbol, center in zip(symbols, coords_bohr):
        if symbol not in BASIS:
            raise ValueError(f"no STO-3G data for element {symbol!r}")
        for kind, exps, coefs in BASIS[symbol]:
            if kind == "s":
                functions.append(((0, 0, 0), exps, coefs, tuple(center)))
            elif kind == "p":
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    functions.append((lmn, exps, coefs, tuple(center)))
    return functions

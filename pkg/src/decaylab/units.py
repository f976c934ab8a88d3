"""Unit conversion between energies in MeV and angular frequencies in 1/s."""

HBAR_MEV_S = 6.58211915e-22


def mev_to_rate(energy_mev: float) -> float:
    return energy_mev / HBAR_MEV_S


def rate_to_mev(rate: float) -> float:
    return rate * HBAR_MEV_S


def parse_rate(text: str) -> float:
    """Parse ``"2.8e9"`` (1/s) or ``"1.84e-12 MeV"`` / ``"1.84e-12MeV"``."""
    s = str(text).strip()
    if s.lower().endswith("mev"):
        return mev_to_rate(float(s[:-3].strip()))
    return float(s)

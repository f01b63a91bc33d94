"""Unit conversions. All internal arithmetic is in atomic units."""

# 1 femtosecond in atomic units of time
FS_TO_AU = 41.341373336

# peak intensity [W/cm^2] of a field with amplitude 1 a.u. (display only)
AU_FIELD_INTENSITY_WCM2 = 3.509e16


def fs_to_au(t_fs: float) -> float:
    return t_fs * FS_TO_AU


def au_to_fs(t_au: float) -> float:
    return t_au / FS_TO_AU


def intensity_wcm2(e0_au: float) -> float:
    """Peak intensity in W/cm^2 for a field amplitude in a.u."""
    return e0_au * e0_au * AU_FIELD_INTENSITY_WCM2

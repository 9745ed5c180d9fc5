# file_handler.py

import json
import logging
import os

import numpy as np
import pandas as pd

from ansatz import sample_table
from errors import ProfileFormatError
from profiles import NonlinearityModel, RadialProfile

ALLOWED_EXTENSIONS = ['.dat', '.txt', '.prof']
CONFIG_EXTENSIONS = ['.yaml', '.yml']

_STRING_KEYS = {"kind", "nonlinearity"}
_INT_KEYS = {"nodes"}
_META_KEYS = ("eta", "meson_mass", "match_radius")


def validate_file(file_path, allowed=None):
    allowed = ALLOWED_EXTENSIONS if allowed is None else allowed
    if not os.path.isfile(file_path):
        raise FileNotFoundError("File does not exist.")
    ext = os.path.splitext(file_path)[1].lower()
    if ext not in allowed:
        raise ValueError(f"Unsupported file type: {ext}")


def _format_value(value):
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_profile(profile: RadialProfile, file_path):
    """
    Columnar profile file: one header line `# kind=... omega=... ...` then rows
    `r u v [chi]` at 17 significant digits.
    """
    os.makedirs(os.path.dirname(os.path.abspath(file_path)), exist_ok=True)
    header = " ".join(f"{key}={_format_value(value)}" for key, value in profile.header().items())
    columns = [profile.grid, profile.u, profile.v]
    if profile.chi is not None:
        columns.append(profile.chi)
    with open(file_path, "w", encoding="utf-8") as handle:
        handle.write(f"# {header}\n")
        np.savetxt(handle, np.column_stack(columns), fmt="%.17g")
    logging.info(f"Profile written to {file_path} ({len(profile.grid)} rows)")
    return file_path


def _parse_header(lines):
    head = {}
    for line in lines:
        for token in line.lstrip("#").split():
            if "=" not in token:
                raise ProfileFormatError(f"Header token without '=': {token!r}")
            key, raw = token.split("=", 1)
            try:
                if key in _STRING_KEYS:
                    head[key] = raw
                elif key in _INT_KEYS:
                    head[key] = int(raw)
                else:
                    head[key] = float(raw)
            except ValueError:
                raise ProfileFormatError(f"Header value for {key} not understood: {raw!r}")
    return head


def read_profile(file_path) -> RadialProfile:
    validate_file(file_path)
    with open(file_path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    header_lines = [line for line in lines if line.startswith("#")]
    head = _parse_header(header_lines)
    for key in ("kind", "omega", "mass"):
        if key not in head:
            raise ProfileFormatError(f"Profile header is missing {key}.")

    try:
        rows = np.loadtxt(file_path, comments="#", ndmin=2)
    except ValueError as e:
        raise ProfileFormatError(f"Profile rows not understood: {e}")
    expected = 4 if head["kind"] == "kgd3d" else 3
    if rows.shape[1] != expected:
        raise ProfileFormatError(f"{head['kind']} profiles have {expected} columns, found {rows.shape[1]}.")

    try:
        model = NonlinearityModel(
            head.get("nonlinearity", "soler_linear"), head.get("lambda", 1.0), head.get("exponent", 1.0),
        )
        profile = RadialProfile(
            kind=head["kind"], omega=head["omega"], mass=head["mass"], grid=rows[:, 0], u=rows[:, 1], v=rows[:, 2],
            chi=rows[:, 3] if expected == 4 else None, decay=head.get("decay"), residual=head.get("residual"),
            model=model, nodes=head.get("nodes", 0), meta={key: head[key] for key in _META_KEYS if key in head},
        )
    except ValueError as e:
        raise ProfileFormatError(str(e))
    logging.debug(f"Read {profile.kind} profile from {file_path}: {len(profile.grid)} rows")
    return profile


def write_report(text, file_path):
    os.makedirs(os.path.dirname(os.path.abspath(file_path)), exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as handle:
        handle.write(text if text.endswith("\n") else text + "\n")
    logging.info(f"Report written to {file_path}")
    return file_path


def write_json(payload, file_path):
    return write_report(json.dumps(payload, indent=2, sort_keys=False), file_path)


def write_table(rows, file_path, columns=None):
    """CSV through pandas; an empty row list still writes the header when columns are given."""
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows), columns=columns)
    os.makedirs(os.path.dirname(os.path.abspath(file_path)), exist_ok=True)
    frame.to_csv(file_path, index=False, float_format="%.17g")
    logging.info(f"Table written to {file_path} ({len(frame)} rows)")
    return file_path


def dump_field(field, points, file_path):
    """Sampled spinor rows x1 x2 x3 Re_psi1 Im_psi1 ... for external visualization."""
    return write_table(sample_table(field, points), file_path)


def write_potential_table(potentials, radii, file_path):
    """MD potentials as `r ell value` rows: the scalar multipoles then the vector profile b = a/r as ell = 1."""
    radii = np.asarray(radii, dtype=float)
    rows = []
    for ell in range(potentials.scalar.lmax + 1):
        values = potentials.scalar.radial(ell, radii)
        rows.extend({"kind": "Phi", "r": r, "ell": ell, "value": value} for r, value in zip(radii, values))
    values = potentials.vector.b(radii)
    rows.extend({"kind": "A", "r": r, "ell": 1, "value": value} for r, value in zip(radii, values))
    return write_table(rows, file_path, columns=["kind", "r", "ell", "value"])

#!/usr/bin/env python3
"""Regenerates the two bundled airfoil polars.

Lift is linear (0.1 per degree) between the stall angles with a gentle
post-stall decline. Drag follows cd = cd_min + k * (cl - cl_mincd)^2 on the
attached branch and grows linearly past stall.

  symmetric : cl(0) = 0, cd(cl=0) = 0.010
  cambered  : cl(-1.8 deg) = 0, cd(cl=0) = 0.045, drag within ~9% of the
              symmetric section for 0.6 <= cl <= 1.2

Writes data/polars/*.polar and include/heliquad/bundled_polars.hpp.
"""
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
SLOPE = 0.1  # per degree

# Symmetric section: cd = 0.01 + 0.05 cl^2.
SYM = dict(name="symmetric", alpha0=0.0, stall_pos=11.0, stall_neg=-11.0,
           cd_min=0.01, k=0.05, cl_mincd=0.0)

# Cambered section: drag polar chosen so cd_cam - cd_sym vanishes at
# cl = 0.6 and cl = 1.2 while cd_cam(0) = 0.045.
_K_CAM = 0.05 + 0.035 / 0.72
_CL_MINCD = (0.035 * 1.8 / 0.72) / (2.0 * _K_CAM)
CAM = dict(name="cambered", alpha0=-1.8, stall_pos=13.0, stall_neg=-9.0,
           cd_min=0.045 - _K_CAM * _CL_MINCD ** 2, k=_K_CAM, cl_mincd=_CL_MINCD)


def row(p, alpha):
    a = alpha - p["alpha0"]
    if a > p["stall_pos"]:
        over = a - p["stall_pos"]
        cl_edge = SLOPE * p["stall_pos"]
        cl = cl_edge - 0.03 * over
        cd = p["cd_min"] + p["k"] * (cl_edge - p["cl_mincd"]) ** 2 + 0.02 * over
    elif a < p["stall_neg"]:
        over = p["stall_neg"] - a
        cl_edge = SLOPE * p["stall_neg"]
        cl = cl_edge + 0.03 * over
        cd = p["cd_min"] + p["k"] * (cl_edge - p["cl_mincd"]) ** 2 + 0.02 * over
    else:
        cl = SLOPE * a
        cd = p["cd_min"] + p["k"] * (cl - p["cl_mincd"]) ** 2
    return alpha, cl, cd


def table(p):
    alphas = [x * 0.5 for x in range(-64, 65)]
    if p["alpha0"] not in alphas:
        alphas.append(p["alpha0"])
    return [row(p, a) for a in sorted(alphas)]


def fmt(x):
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def render(p):
    lines = [f"# {p['name']} section, Re = 100000",
             "# alpha_deg cl cd"]
    for a, cl, cd in table(p):
        lines.append(f"{fmt(a):>10} {fmt(cl):>10} {fmt(cd):>10}")
    return "\n".join(lines) + "\n"


def main():
    texts = {p["name"]: render(p) for p in (SYM, CAM)}
    for name, text in texts.items():
        (ROOT / "data" / "polars" / f"{name}.polar").write_text(text)
    hdr = ["// Generated by tools/gen_polars.py. Do not edit.",
           "#pragma once", "", "#include <string_view>", "",
           "namespace heliquad::bundled {", ""]
    for name, text in texts.items():
        hdr.append(f'inline constexpr std::string_view k_{name}_polar = R"polar(' + text + ')polar";')
        hdr.append("")
    hdr.append("}  // namespace heliquad::bundled")
    (ROOT / "include" / "heliquad" / "bundled_polars.hpp").write_text("\n".join(hdr) + "\n")


if __name__ == "__main__":
    main()

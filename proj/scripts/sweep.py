#!/usr/bin/env python3
"""Regularizer x seed sweep through the dwtgs CLI; prints held-out PSNR per run and the seed means."""

import argparse
import concurrent.futures
import os
import pathlib
import statistics
import subprocess
import sys


def run_one(binary, target, out_root, regularizer, seed, extra):
    out_dir = out_root / f"{regularizer}_seed{seed}"
    cmd = [
        binary, "train", "--target", target, "--out-dir", str(out_dir),
        "--set", f"regularizer={regularizer}", "--set", f"seed={seed}",
    ]
    for kv in extra:
        cmd += ["--set", kv]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"{' '.join(cmd)} exited {proc.returncode}: {proc.stderr.strip()}")
    values = dict(line.split(None, 1) for line in proc.stdout.splitlines() if " " in line)
    return regularizer, seed, float(values["heldout_psnr"]), float(values["train_psnr"])


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--binary", default="build/tools/dwtgs")
    p.add_argument("--target", default="data/astronaut_128.ppm")
    p.add_argument("--out", default="sweep_out")
    p.add_argument("--regularizers", nargs="+", default=["none", "fregs", "dwtgs", "dwtgs_sup_hf"])
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--iterations", type=int, default=4000)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--set", dest="extra", action="append", default=[], metavar="KEY=VALUE",
                   help="extra config override, repeatable")
    args = p.parse_args()

    out_root = pathlib.Path(args.out)
    extra = [f"iterations={args.iterations}", f"eval_every={max(1, args.iterations // 4)}"] + args.extra
    jobs = [(r, s) for r in args.regularizers for s in args.seeds]
    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = [pool.submit(run_one, args.binary, args.target, out_root, r, s, extra) for r, s in jobs]
        for f in concurrent.futures.as_completed(futures):
            r, s, heldout, train = f.result()
            results[(r, s)] = heldout
            print(f"{r:>13} seed {s}: heldout {heldout:.3f} dB, train {train:.3f} dB", file=sys.stderr)

    means = {r: statistics.fmean(results[(r, s)] for s in args.seeds) for r in args.regularizers}
    print("| regularizer | " + " | ".join(f"seed {s}" for s in args.seeds) + " | mean |")
    print("|---|" + "---|" * (len(args.seeds) + 1))
    for r in args.regularizers:
        cells = " | ".join(f"{results[(r, s)]:.3f}" for s in args.seeds)
        print(f"| {r} | {cells} | {means[r]:.3f} |")
    if "dwtgs" in means:
        for r in args.regularizers:
            if r != "dwtgs":
                print(f"dwtgs - {r}: {means['dwtgs'] - means[r]:+.3f} dB")


if __name__ == "__main__":
    main()

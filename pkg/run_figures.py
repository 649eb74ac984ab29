#!/usr/bin/env python3
"""
Figure Data Launcher
Regenerates every dataset under configs/ with the qwalk CLI, then fits the
sweeps and compares their kinks.

Usage:
    python run_figures.py              # Everything, sweeps included
    python run_figures.py --quick      # Skip the size sweeps
    python run_figures.py fig03 fig05  # Only configs whose name starts with these
"""

import subprocess
import sys
from pathlib import Path

from rich.console import Console

console = Console()

ROOT = Path(__file__).parent
CONFIGS = ROOT / "configs"
RESULTS = ROOT / "results"

# Sweep config stem -> fits to run on its CSV
SWEEP_FITS = {
    "fig04_torus_sweep": ["inverse_log2", "piecewise_sqrt_n"],
    "fig10_hex_sweep": ["inverse_log2", "piecewise_sqrt_n"],
    "fig11_diagonal_sweep": ["inverse_log2", "piecewise_sqrt_n"],
    "fig12_bethe_shell0": ["sqrt_n", "linear"],
}

# Structures compared in the kink report
KINK_INPUTS = {
    "torus": "fig04_torus_sweep",
    "hex_torus": "fig10_hex_sweep",
    "torus_diagonal": "fig11_diagonal_sweep",
}


def qwalk(*args: str) -> bool:
    """Run one CLI command; False when it exits non-zero"""
    cmd = ["uv", "run", "qwalk", *args]
    console.print(f"   [yellow]$ {' '.join(cmd[2:])}[/yellow]")
    result = subprocess.run(cmd, cwd=ROOT)
    if result.returncode != 0:
        console.print(f"[red]❌ exit {result.returncode}[/red]")
        return False
    return True


def command_for(config: Path) -> str:
    text = config.read_text()
    for kind in ("sweep", "scan", "spread", "run"):
        if f'"{kind}":' in text:
            return kind
    raise ValueError(f"{config.name} names no experiment")


def main():
    """Main launcher"""
    console.rule("[bold]Quantum walk search - figure data[/bold]")

    quick = "--quick" in sys.argv
    prefixes = [a for a in sys.argv[1:] if not a.startswith("--")]

    configs = sorted(CONFIGS.glob("*.json"))
    if prefixes:
        configs = [c for c in configs if any(c.stem.startswith(p) for p in prefixes)]
    if quick:
        configs = [c for c in configs if command_for(c) != "sweep"]

    failed = []
    for config in configs:
        console.print(f"\n[blue]▶ {config.stem}[/blue]")
        out = RESULTS / f"{config.stem}.csv"
        if not qwalk(command_for(config), "--config", str(config), "--out", str(out), "--gnuplot"):
            failed.append(config.stem)
            continue
        for model in SWEEP_FITS.get(config.stem, []):
            if not qwalk("fit", "--input", str(out), "--model", model):
                failed.append(f"{config.stem} ({model})")

    kink_inputs = [
        f"{kind}={RESULTS / f'{stem}.csv'}"
        for kind, stem in KINK_INPUTS.items()
        if (RESULTS / f"{stem}.csv").exists()
    ]
    if len(kink_inputs) > 1:
        console.print("\n[blue]▶ kink comparison[/blue]")
        args = ["kink", "--out", str(RESULTS / "kink_report.json")]
        for entry in kink_inputs:
            args += ["--input", entry]
        if not qwalk(*args):
            failed.append("kink")

    if failed:
        console.print(f"\n[red]❌ {len(failed)} failed: {', '.join(failed)}[/red]")
        sys.exit(1)
    console.print(f"\n[green]✅ {len(configs)} dataset(s) written to {RESULTS}[/green]")


if __name__ == "__main__":
    main()

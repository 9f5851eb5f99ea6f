"""
Diagnostics - Health checks for the co-simulation stack.
Run this to verify packages, configuration and numerics before a study.
"""
import math
import sys
from pathlib import Path

from dotenv import load_dotenv

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

load_dotenv(project_root / ".env")


def check_imports() -> dict:
    """Check that all required packages can be imported."""
    results = {"status": "checking", "packages": {}}

    packages = [
        ("numpy", "NumPy"),
        ("scipy", "SciPy"),
        ("yaml", "PyYAML"),
        ("dotenv", "python-dotenv"),
        ("pydantic", "Pydantic"),
    ]

    all_ok = True
    for module, name in packages:
        try:
            imported = __import__(module)
            results["packages"][name] = f"✅ {getattr(imported, '__version__', 'OK')}"
        except ImportError as e:
            results["packages"][name] = f"❌ {e}"
            all_ok = False

    results["status"] = "healthy" if all_ok else "missing_packages"
    return results


def check_config() -> dict:
    """Check configuration loading and the run defaults it yields."""
    results = {"status": "checking"}

    try:
        from src.config import settings
        from src.master import CosimConfig

        config = settings()
        defaults = CosimConfig()

        results["micro_method"] = config["micro"]["method"]
        results["micro_tol"] = (config["micro"]["abs_tol"], config["micro"]["rel_tol"])
        results["default_run"] = defaults.label()
        results["models"] = sorted(config["models"])
        results["output_directory"] = config["output"]["directory"]
        results["status"] = "healthy"

    except Exception as e:
        results["status"] = "error"
        results["error"] = str(e)

    return results


def check_shapes() -> dict:
    """Check unit mass of every placed hat on a few interval widths."""
    results = {"status": "checking"}

    try:
        from src.shapes import ShapeKind, place_on_interval

        worst = 0.0
        for kind in ShapeKind:
            if not kind.is_hat:
                continue
            for width in (0.02, 0.2, 2.0):
                shape = place_on_interval(kind, 1.0, 1.0 + width)
                worst = max(worst, abs(shape.integral(1.0, 1.0 + width) - 1.0))

        results["max_mass_deviation"] = f"{worst:.2e}"
        results["status"] = "healthy" if worst < 1e-10 else "inaccurate"

    except Exception as e:
        results["status"] = "error"
        results["error"] = str(e)

    return results


def check_cosimulation() -> dict:
    """Run a short spring-mass co-simulation against its reference."""
    results = {"status": "checking"}

    try:
        from src.master import CosimConfig, reference_run, run_cosimulation

        config = CosimConfig(model="spring-mass", H=0.1, t_end=1.0, ext_order=1, smoothing=True, policy="smooth_2")
        record = run_cosimulation(config)
        error = record.max_error(reference_run(config))
        residual = max(abs(report.residual) for report in record.closure)

        results["run"] = config.label()
        results["max_error"] = f"{error:.3e}"
        results["closure_residual"] = f"{residual:.3e}"
        results["status"] = "healthy" if math.isfinite(error) and error < 1e-2 else "inaccurate"

    except Exception as e:
        results["status"] = "error"
        results["error"] = str(e)

    return results


def run_all_tests(verbose: bool = True) -> dict:
    """Run all diagnostic checks."""

    checks = [
        ("Imports", check_imports),
        ("Configuration", check_config),
        ("Shapes", check_shapes),
        ("Co-simulation", check_cosimulation),
    ]

    all_results = {}
    all_healthy = True

    for name, check in checks:
        if verbose:
            print(f"\n{'='*50}")
            print(f"Checking: {name}")
            print('='*50)

        try:
            result = check()
            all_results[name] = result

            status = result.get("status", "unknown")
            is_healthy = status == "healthy"

            if not is_healthy:
                all_healthy = False

            if verbose:
                status_emoji = "✅" if is_healthy else "⚠️" if status != "error" else "❌"
                print(f"Status: {status_emoji} {status}")

                for key, value in result.items():
                    if key != "status":
                        print(f"  {key}: {value}")

        except Exception as e:
            all_results[name] = {"status": "error", "error": str(e)}
            all_healthy = False
            if verbose:
                print(f"Status: ❌ Error - {e}")

    all_results["overall"] = "healthy" if all_healthy else "issues_found"

    return all_results


def print_summary(results: dict):
    """Print a summary of check results."""
    print("\n" + "="*50)
    print("DIAGNOSTIC SUMMARY")
    print("="*50)

    for name, result in results.items():
        if name == "overall":
            continue

        status = result.get("status", "unknown")
        emoji = "✅" if status == "healthy" else "⚠️" if status != "error" else "❌"
        print(f"{emoji} {name}: {status}")

    print("\n" + "-"*50)
    if results.get("overall") == "healthy":
        print("✅ All checks passed.")
        print("\nRun: cosim study convergence --ext 1 --H 0.2,0.1,0.05,0.025")
    else:
        print("⚠️ Some issues found. Review the details above.")
        print("\nCommon fixes:")
        print("  - Missing packages: pip install -r requirements.txt")
        print("  - Inaccurate numerics: lower COSIM_MICRO_TOL in .env")


if __name__ == "__main__":
    from src.config import configure_logging

    configure_logging()
    print("Co-simulation - System Diagnostics")
    print("="*50)

    results = run_all_tests(verbose=True)
    print_summary(results)

from src.loads.base import Load
from src.loads.polynomial import ConstantLoad, ZeroLoad
from src.loads.sine import SineLoad

def builtin_loads() -> dict[str, Load]:
    loads: list[Load] = [SineLoad(), ConstantLoad(), ZeroLoad()]
    return {ld.name: ld for ld in loads}

def load_by_name(name: str) -> Load:
    loads = builtin_loads()
    if name not in loads:
        raise ValueError(f"unknown load {name!r}, expected one of {', '.join(sorted(loads))}")
    return loads[name]

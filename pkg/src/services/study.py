import asyncio
import logging

from src.config import Settings
from src.fem.mesh import Mesh, refine_uniform, uniform_mesh
from src.loads import Load, builtin_loads
from src.models import ConvergenceRecord, StudyConfig, dof_count
from src.services.analysis import compute_errors, condition_number
from src.services.dpg_core import assemble, solve
from src.services.exact_solution import ExactSolution, solve_exact

log = logging.getLogger("study")

class StudyRunner:
    """
    Runs the convergence grid of a StudyConfig: every (t, p) pair on uniform
    meshes with n0 * 2^level elements. Levels run concurrently in worker
    threads; a level that fails is logged and recorded, the others continue.
    """

    def __init__(self, settings: Settings, loads: dict[str, Load] | None = None):
        self.settings = settings
        self.loads = loads or builtin_loads()

    def _load(self, name: str) -> Load:
        if name not in self.loads:
            raise ValueError(f"unknown load {name!r}, expected one of {', '.join(sorted(self.loads))}")
        return self.loads[name]

    def run_level(
        self,
        cfg: StudyConfig,
        exact: ExactSolution,
        p: int,
        mesh: Mesh,
        level: int,
    ) -> ConvergenceRecord:
        n = mesh.n
        system = assemble(mesh, cfg.bc, exact.t, p, exact.load, quad_extra=self.settings.quad_extra)
        sol = solve(system, permute=self.settings.permute, refinement_steps=self.settings.refinement_steps)
        rec = compute_errors(sol, exact, level=level, error_quad_extra=self.settings.error_quad_extra)

        if cfg.condition:
            rec.condition = condition_number(
                system, iterations=self.settings.condition_iterations, permute=self.settings.permute
            )

        log.info(
            "bc=%s t=%g p=%d level=%d n=%d dofs=%d err_u=%.3e err_M=%.3e residual=%.3e",
            cfg.bc, exact.t, p, level, n, rec.dofs, rec.err_u, rec.err_M, rec.residual,
        )
        return rec

    async def run(self, cfg: StudyConfig) -> list[ConvergenceRecord]:
        load = self._load(cfg.load)
        exacts = {t: solve_exact(cfg.bc, t, load) for t in cfg.t}
        sem = asyncio.Semaphore(self.settings.workers)

        # nested sequence: level k is the k-th uniform refinement of the n0 mesh
        meshes = [uniform_mesh(cfg.n0)]
        for _ in range(cfg.levels - 1):
            meshes.append(refine_uniform(meshes[-1]))

        log.info(
            "Study bc=%s t=%s p=%s n0=%d levels=%d load=%s",
            cfg.bc, cfg.t, cfg.p, cfg.n0, cfg.levels, load.name,
        )

        async def one(ti: int, pi: int, level: int) -> tuple[tuple[int, int, int], ConvergenceRecord]:
            t, p = cfg.t[ti], cfg.p[pi]
            async with sem:
                try:
                    rec = await asyncio.to_thread(self.run_level, cfg, exacts[t], p, meshes[level], level)
                except Exception as ex:
                    log.exception("Level failed (t=%g p=%d level=%d): %s", t, p, level, ex)
                    n = meshes[level].n
                    rec = ConvergenceRecord(
                        level=level, n=n, dofs=dof_count(n, p), h=meshes[level].max_h, t=t, p=p, failed=True
                    )
            return (ti, pi, level), rec

        jobs = [
            one(ti, pi, level)
            for ti in range(len(cfg.t))
            for pi in range(len(cfg.p))
            for level in range(cfg.levels)
        ]
        results = await asyncio.gather(*jobs)

        # completion order is arbitrary; output order is the grid order
        records = [rec for _key, rec in sorted(results, key=lambda kv: kv[0])]
        failed = sum(r.failed for r in records)
        log.info("Study finished: %d levels, %d failed", len(records), failed)
        return records

"""FastAPI service wrapping the training, evaluation, and data tooling.

Every endpoint is stateless: requests name server-local paths, the work runs
synchronously, and the response carries the full result. Package errors map
to a typed JSON envelope ``{"error": {"kind", "message"}}`` whose kind the
CLI translates into exit codes.
"""

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import runner
from ..errors import MpcanetError, NumericError
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="mpcanet service", version="0.1.0")

    @app.exception_handler(MpcanetError)
    async def _package_error(request: Request, exc: MpcanetError):
        status = 500 if isinstance(exc, NumericError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": {"kind": exc.kind, "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": {"kind": "usage", "message": str(exc)}},
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        return runner.train_run(
            req.config, req.data, req.model_out, ratio=req.ratio, seed=req.seed
        )

    @app.post("/api/eval", response_model=schemas.EvalResponse)
    def evaluate(req: schemas.EvalRequest):
        return runner.eval_run(req.model, req.data)

    @app.post("/api/bench", response_model=schemas.BenchResponse)
    def bench(req: schemas.BenchRequest):
        return runner.bench_run(
            req.config,
            req.data,
            req.splits,
            req.seed_base,
            ratio=req.ratio,
            patch_sweep=req.patch_sweep,
        )

    @app.post("/api/sweep-mpca-lda", response_model=schemas.SweepResponse)
    def sweep_mpca_lda(req: schemas.SweepRequest):
        return runner.sweep_mpca_lda_run(
            req.data,
            d_min=req.d_min,
            d_max=req.d_max,
            d_step=req.d_step,
            splits=req.splits,
            seed_base=req.seed_base,
            ratio=req.ratio,
            energy_q=req.energy_q,
        )

    @app.post("/api/synth", response_model=schemas.SynthResponse)
    def synth(req: schemas.SynthRequest):
        return runner.synth_run(
            req.dims, req.classes, req.per_class, req.rank, req.sigma, req.seed, req.out_dir
        )

    @app.post("/api/inspect", response_model=schemas.InspectResponse)
    def inspect(req: schemas.InspectRequest):
        return runner.inspect_run(req.model)

    return app


app = create_app()

"""Interface en ligne de commande du pipeline DSS

Usage: dss <sous-commande> --config PATH [--seed N] [--out DIR]
"""
import argparse
import logging
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import Settings, get_settings
from app.core.errors import DssError
from app.core.logging import setup_logging
from app.pipeline import commands

logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="Fichier de configuration (KEY=value, sections séparées par '__')")
    parent.add_argument("--seed", type=int, help="Graine globale (remplace celles de la configuration)")
    parent.add_argument("--out", help="Dossier des sorties (CSV, JSON, courbes)")
    parent.add_argument("--debug", action="store_true", help="Logs détaillés")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dss", description="Pipeline de surveillance par drone")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    sub.add_parser("train-priors", parents=[common], help="Apprendre les priors structurels L3-L6")

    train_pose = sub.add_parser("train-pose", parents=[common], help="Entraîner le réseau de pose")
    train_pose.add_argument("--random-init", action="store_true", help="Initialisation aléatoire au lieu des priors")

    eval_pose = sub.add_parser("eval-pose", parents=[common], help="Courbes de précision des points clés")
    eval_pose.add_argument("--d", type=float, nargs="+", default=list(commands.DEFAULT_D_VALUES))

    for name, default_source in (("train-svm", "ground-truth"), ("eval-activity", "model")):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--poses", choices=commands.POSE_SOURCES, default=default_source)
        p.add_argument("--split", choices=commands.PROTOCOLS, default="pose",
                       help="'pose' : 60/20/20, 'activity' : 60/40")
        if name == "train-svm":
            p.add_argument("--C-grid", dest="C_grid", type=float, nargs="+")
            p.add_argument("--gamma-grid", dest="gamma_grid", type=float, nargs="+")

    infer = sub.add_parser("infer", parents=[common], help="Inférence sur les boîtes détectées")
    infer.add_argument("--image", help="Limiter à une image du fichier de boîtes")
    infer.add_argument("--boxes", help="Fichier de boîtes JSONL")
    infer.add_argument("--overlay", action="store_true", help="Écrire une image des squelettes")

    generate = sub.add_parser("generate-data", parents=[common], help="Générer un jeu synthétique")
    generate.add_argument("--size", type=int, default=200, help="Nombre d'images")

    serve = sub.add_parser("serve", parents=[common], help="Service d'inférence local")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    return parser


def with_seed(settings: Settings, seed: Optional[int]) -> Settings:
    """Propager --seed à toutes les étapes aléatoires"""
    if seed is None:
        return settings
    return settings.model_copy(update={
        "seed": seed,
        "train": settings.train.model_copy(update={"seed": seed}),
        "priors": settings.priors.model_copy(update={"seed": seed}),
        "synthetic": settings.synthetic.model_copy(update={"seed": seed}),
    })


def load_settings(args: argparse.Namespace) -> Settings:
    overrides = {
        "outputs_dir": args.out,
        "boxes_path": getattr(args, "boxes", None),
        "host": getattr(args, "host", None),
        "port": getattr(args, "port", None),
    }
    if args.debug:
        overrides["debug"] = True
    return with_seed(get_settings(args.config, **overrides), args.seed)


def run(args: argparse.Namespace, settings: Settings) -> None:
    if args.command == "train-priors":
        commands.cmd_train_priors(settings)
    elif args.command == "train-pose":
        commands.cmd_train_pose(settings, random_init=args.random_init)
    elif args.command == "eval-pose":
        commands.cmd_eval_pose(settings, args.d)
    elif args.command == "train-svm":
        commands.cmd_train_svm(settings, args.poses, args.C_grid, args.gamma_grid, args.split)
    elif args.command == "eval-activity":
        commands.cmd_eval_activity(settings, args.poses, args.split)
    elif args.command == "infer":
        commands.cmd_infer(settings, image=args.image, overlay=args.overlay)
    elif args.command == "generate-data":
        commands.cmd_generate_data(settings, args.size)
    elif args.command == "serve":
        import uvicorn

        from app.main import create_app
        uvicorn.run(create_app(settings), host=settings.host, port=settings.port)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.debug)
    try:
        settings = load_settings(args)
        setup_logging(settings.debug)
        run(args, settings)
    except ValidationError as e:
        logger.error(f"❌ Configuration invalide: {e}")
        return 2
    except DssError as e:
        logger.error(f"❌ {type(e).__name__}: {e.message}")
        return e.exit_code
    logger.info(f"✅ {args.command} terminé")
    return 0

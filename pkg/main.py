import argparse
import logging
import sys

from mining.errors import PipelineError, UsageError
from mining.tree import CRITERIA
from utils.config import load_config

# --- Import the command handlers ---
from handlers import evaluate, featurize, predict, synth, train

# --- Setup Logging ---
logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", level=logging.INFO
)
logging.getLogger("joblib").setLevel(logging.WARNING)
logger = logging.getLogger(__name__)

COMMANDS = {
    'synth': synth.run,
    'featurize': featurize.run,
    'train': train.run,
    'predict': predict.run,
    'evaluate': evaluate.run,
}

# --- Flag -> config key ---
OVERRIDES = {
    'seed': 'SEED',
    'out_dir': 'OUT_DIR',
    'folds': 'FOLDS',
    'confidence': 'CONFIDENCE',
    'min_leaf': 'MIN_LEAF',
    'criterion': 'CRITERION',
    'delimiter': 'DELIMITER',
    'accounts': 'ACCOUNTS_FILE',
    'transactions': 'TRANSACTIONS_FILE',
    'n': 'SYNTH_N',
    'sector_mix': 'SYNTH_SECTOR_MIX',
    'workers': 'WORKERS',
    'sector_score': 'SECTOR_SCORE',
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value configuration file (default: $LENDING_CONFIG)')
    common.add_argument('--seed', type=int)
    common.add_argument('--out-dir')
    common.add_argument('--folds', type=int)
    common.add_argument('--confidence', type=float, help='pruning confidence factor in (0, 0.5]')
    common.add_argument('--min-leaf', type=int, help='minimum rows per branch')
    common.add_argument('--criterion', choices=CRITERIA)
    common.add_argument('--delimiter', help='field delimiter of every table')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(
        prog='lending-miner',
        description='Loan-account mining: featurize transactions, induce and prune a decision tree, '
                    'extract rules and rank sectors.',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('synth', parents=[common], help='generate synthetic accounts and transactions')
    p.add_argument('--n', type=int, help='number of accounts')
    p.add_argument('--sector-mix', help='sector weights, e.g. RiceandFlowerMills:1,Other:0')

    p = commands.add_parser('featurize', parents=[common], help='build the discretized training table')
    p.add_argument('--accounts', help='accounts table')
    p.add_argument('--transactions', help='transactions table')

    p = commands.add_parser('train', parents=[common], help='induce, prune and export a model')
    p.add_argument('table', help='discretized table with Class_Label')
    p.add_argument('--no-prune', action='store_true')
    p.add_argument('--prune-audit', action='store_true', help='write one line per pruning decision')
    p.add_argument('--abbreviate', action='store_true', help='shorten attribute names in tree.txt (maxCrAmount -> maxCA)')

    p = commands.add_parser('predict', parents=[common], help='classify an unlabelled discretized table')
    p.add_argument('table')
    p.add_argument('--model', help='model file (default: OUT_DIR/model.json)')
    p.add_argument('--no-fallback', action='store_true', help='fail on rows no rule matches')

    p = commands.add_parser('evaluate', parents=[common], help='cross-validate and rank sectors')
    p.add_argument('table')
    p.add_argument('--holdout', help='separately labelled table scored with the full model')
    p.add_argument('--workers', type=int)
    p.add_argument('--sector-score', choices=('mean-rank', 'good-share'))
    return parser


def overrides_from(args: argparse.Namespace) -> dict[str, object]:
    overrides = {key: getattr(args, flag, None) for flag, key in OVERRIDES.items()}
    if getattr(args, 'no_prune', False):
        overrides['PRUNE'] = 'false'
    if getattr(args, 'prune_audit', False):
        overrides['PRUNE_AUDIT'] = 'true'
    if getattr(args, 'abbreviate', False):
        overrides['ABBREVIATE_TREE'] = 'true'
    if getattr(args, 'no_fallback', False):
        overrides['RULE_FALLBACK'] = 'false'
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on bad usage; usage errors are 1 here.
        return 0 if e.code in (0, None) else UsageError.exit_code

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = load_config(args.config, overrides_from(args))
    except PipelineError as e:
        logger.error(f"Configuration error: {e}")
        print(f"{args.command}: error: {e}", file=sys.stderr)
        return e.exit_code

    logger.info(f"Running {args.command} (seed {config.seed}, output in {config.out_dir}).")
    return COMMANDS[args.command](args, config)


if __name__ == '__main__':
    sys.exit(main())

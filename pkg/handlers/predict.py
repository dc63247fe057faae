"""
Handler for the predict command: model + unlabelled discretized table -> predictions.
"""
import logging
from pathlib import Path

from mining.pipeline import Model, predict
from utils.guards import exit_on_error
from utils.logger import log_activity
from utils.tables import read_json, read_table, write_frame

logger = logging.getLogger(__name__)

PREDICTIONS_FILE = 'predictions.csv'


@exit_on_error('predict')
def run(args, config) -> int:
    model_path = Path(args.model) if args.model else config.out_dir / 'model.json'
    model = Model.from_dict(read_json(model_path))
    frame = read_table(args.table, config.delimiter)

    predictions = predict(model, frame, config.rule_fallback)
    write_frame(predictions, config.out_dir / PREDICTIONS_FILE, config.delimiter)

    log_activity(config.run_log, 'predict', 'completed', f"{len(predictions)} rows scored with {model_path}", config.timezone)
    print(f"Predicted {len(predictions)} rows")
    return 0

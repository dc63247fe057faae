"""
Handler for the train command: discretized table -> model, tree text and rules.
"""
import logging

from mining.pipeline import train
from mining.rules import render_rules, rules_frame
from mining.tree import leaf_count, render_tree
from utils.guards import exit_on_error
from utils.logger import log_activity
from utils.tables import read_table, write_frame, write_json, write_text

logger = logging.getLogger(__name__)

# --- Output files ---
MODEL_FILE = 'model.json'
TREE_FILE = 'tree.txt'
RULES_FILE = 'rules.txt'
RULES_TABLE = 'rules.csv'
PRUNE_AUDIT_FILE = 'prune.txt'


@exit_on_error('train')
def run(args, config) -> int:
    frame = read_table(args.table, config.delimiter)
    audit_lines: list[str] = []
    model = train(frame, config, audit_lines.append if config.prune_audit else None)
    rules = model.rules

    out = config.out_dir
    write_json(out / MODEL_FILE, model.to_dict())
    write_text(out / TREE_FILE, render_tree(model.tree, config.abbreviate_tree))
    write_text(out / RULES_FILE, render_rules(rules))
    write_frame(rules_frame(rules), out / RULES_TABLE, config.delimiter)
    if config.prune_audit:
        write_text(out / PRUNE_AUDIT_FILE, ''.join(f"{line}\n" for line in audit_lines))

    leaves = leaf_count(model.tree)
    log_activity(config.run_log, 'train', 'completed', f"{model.rows} rows, {leaves} leaves", config.timezone)
    print(f"Number of Leaves : {leaves}")
    return 0

from .plan import ScanPlan, SEED_ENV, class_registry, class_info, plan_from_dict, load_plan
from .records import (ScanRecord, SkipEvent, BinTable, Summary, X_SLACK, bin_index, bin_max, summarize,
                      write_header, write_records, read_records, write_bins, write_summary, write_skips)
from .samplers import WorkItem, GridCycle, generate, local_rescan, build_domains, item_seeds
from .campaign import Campaign, solve_item, solve_all, run_campaign, run_scan, union_postprocess
from .optimizer import RatioOptimizer, optimize_ratio

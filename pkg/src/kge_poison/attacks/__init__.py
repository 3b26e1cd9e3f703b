from .base import Action, Strategy, AttackConfig, IndirectConfig, IndirectDetails, Perturbation, target_rng
from .candidates import CandidateSet, delete_candidates, add_candidates, draw_add_candidate
from .direct import shift_vector, score_delete, score_add, direct_attack, step_stability
from .indirect import ShiftChain, transfer_shift, build_shift_chain, path_penalty, select_paths, indirect_attack
from .baselines import random_direct, random_indirect
from .strategies import (AttackStrategy, DirectAttack, IndirectAttack, RandomDirectAttack, RandomIndirectAttack,
                         make_strategy)

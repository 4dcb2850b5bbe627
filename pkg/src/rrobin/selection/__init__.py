from .ops import ActiveSet, Candidate, endorser_population, select_active, select_candidates, select_endorsers
from .queue import age_key, age_order, candidates_at, is_eligible, skip_walk
from .sampling import EmptyPopulation, sample_indices

from src.estimation.model import ClassDiagnostics, PseudoSample, SVineModel, load_model, save_model
from src.estimation.recursion import ClassResolver, HCache
from src.estimation.selection import select_structure
from src.estimation.sequential import aic, class_logliks, fit_sequential, loglik

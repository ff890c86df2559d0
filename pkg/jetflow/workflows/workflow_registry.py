from enum import Enum

from jetflow.workflows.continuation_workflow import ContinuationWorkflow
from jetflow.workflows.fit_workflow import FitWorkflow
from jetflow.workflows.profiles_workflow import ProfilesWorkflow
from jetflow.workflows.solve_workflow import SolveWorkflow
from jetflow.workflows.verify_workflow import VerifyWorkflow


class WorkflowRegistry(Enum):
    """Workflow per subcommand; member names are the upper-cased subcommands."""

    PROFILES = ProfilesWorkflow
    SOLVE = SolveWorkflow
    FIT = FitWorkflow
    CONTINUE = ContinuationWorkflow
    VERIFY = VerifyWorkflow

    @classmethod
    def for_subcommand(cls, subcommand: str) -> "WorkflowRegistry":
        return cls[subcommand.upper()]

"""
FIDE Solver - Logging Module
============================

This module provides centralized logging for solves, convergence studies
and certificates. Every entry carries a log type, a status and optional
structured details serialized as JSON, so a run can be audited from the
log stream alone.
"""

import json
import logging
import traceback

_logger = logging.getLogger("fide_solver")


class SolverLogger:
    """
    Centralized logging class for solver operations.

    Log types used across the package:
    - Solve: start/end of a fixed-point solve
    - Iteration: per-step residuals
    - Study: convergence-study rows
    - Certificate: contraction certificates and bound checks
    - Problem / Config: definition and settings issues
    """

    @staticmethod
    def truncate_message(message, max_length=200):
        """
        Truncate a message to keep single log lines readable.

        Args:
            message (str): Message to truncate
            max_length (int): Maximum allowed length (default: 200)

        Returns:
            str: Truncated message with "..." suffix if needed
        """
        if len(message) > max_length:
            return message[:max_length - 3] + "..."
        return message

    @staticmethod
    def log(log_type, status, message, details=None, error_traceback=None):
        """
        Emit one structured log entry.

        This is the core logging method that all other log methods use.
        Failures inside logging are swallowed so that a broken handler can
        never abort a computation.

        Args:
            log_type (str): Type of log (e.g., "Solve", "Iteration", "Study")
            status (str): Status of the operation ("Success", "Failed", "Info")
            message (str): Log message (will be truncated if too long)
            details (dict/str, optional): Additional details stored as JSON
            error_traceback (str, optional): Error traceback for debugging
        """
        try:
            level = logging.ERROR if status == "Failed" else logging.INFO
            if log_type == "Iteration" and status == "Info":
                level = logging.DEBUG
            if not _logger.isEnabledFor(level):
                return

            text = f"[{log_type}] {status}: {SolverLogger.truncate_message(message)}"
            if details:
                if isinstance(details, str):
                    details = SolverLogger.truncate_message(details)
                text += " " + json.dumps(details, default=str, sort_keys=True)
            if error_traceback:
                text += "\n" + error_traceback
            _logger.log(level, text)
        except Exception:
            pass

    @staticmethod
    def log_solve_start(problem_name, n, rule):
        """Log the start of a solve"""
        SolverLogger.log(
            log_type="Solve",
            status="Info",
            message=f"Starting solve of {problem_name} on N={n}",
            details={"problem": problem_name, "N": n, "rule": rule},
        )

    @staticmethod
    def log_solve_end(problem_name, success=True, iterations=None, stop_reason=None, error=None):
        """Log the end of a solve"""
        message = f"Solve of {problem_name} {'finished' if success else 'failed'}"
        if error:
            message += f" - {str(error)}"
        SolverLogger.log(
            log_type="Solve",
            status="Success" if success else "Failed",
            message=message,
            details={"iterations": iterations, "stop_reason": stop_reason},
            error_traceback=traceback.format_exc() if error else None,
        )

    @staticmethod
    def log_iteration(m, residual, psi_norm):
        """Log one fixed-point step"""
        SolverLogger.log(
            log_type="Iteration",
            status="Info",
            message=f"m={m} residual={residual:.4e}",
            details={"m": m, "residual": residual, "psi_norm": psi_norm},
        )

    @staticmethod
    def log_study_row(problem_name, n, m, error):
        """Log one finished row of a convergence study"""
        SolverLogger.log(
            log_type="Study",
            status="Info",
            message=f"{problem_name} N={n} m={m}",
            details={"N": n, "m": m, "error": error},
        )

    @staticmethod
    def log_certificate(q, contractive, details=None):
        """Log a contraction certificate"""
        SolverLogger.log(
            log_type="Certificate",
            status="Success" if contractive else "Info",
            message=f"q={q:.6g} contractive={contractive}",
            details=details,
        )

    @staticmethod
    def log_error(message, error=None, details=None, log_type="Solve"):
        """Log an error"""
        if error:
            message = f"{message} - {str(error)}"
        SolverLogger.log(
            log_type=log_type,
            status="Failed",
            message=message,
            details=details,
            error_traceback=traceback.format_exc() if error else None,
        )


def configure_logging(level="WARNING"):
    """Attach a stderr handler to the package logger at the given level."""
    if not _logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
        _logger.addHandler(handler)
    _logger.setLevel(getattr(logging, str(level).upper(), logging.WARNING))

"""Messages shown to the user during a multibell run."""

from textwrap import dedent


fair_sampling = (
    "Fair sampling assumed: detected pairs are taken to represent all emitted pairs."
)

nothing_to_do = """
The manifest lists no inequalities; nothing to do.
"""

pipeline_started = """
Running the Bell analysis pipeline...
"""

unphysical_source_state = """
The source state gives negative outcome probabilities at some angles. Bell runs
  scheduled at such angles are simulated on the nearest physical white-noise mixture.
"""


# --- Dynamic strings ---


def stage_started(stage):
    return f"  Stage: {stage}..."


def noise_admixture(p_noise):
    return f"  That mixture adds {p_noise:.2%} white noise to the source state."


def wrote_file(path):
    return f"  Wrote {path}"


def success_msg(out_dir, n_inequalities, log_output=False):
    """Summary shown at the end of a successful pipeline run."""
    msg = dedent(
        f"""
        --- Pipeline finished: {n_inequalities} inequalities analyzed. ---

        Results are in {out_dir}:
        - One JSON file per inequality.
        - summary.json and summary.csv, one row per inequality.
        - run_metadata.json, with the timestamp and arguments of this run.
    """
    )

    if log_output:
        msg += dedent(
            """
        - A full record of this run is in the multibell_logs directory.
        """
        )

    return msg

import pytest

from verimem.executor import (
    AgentParseError,
    CORRECTIVE_REPROMPT,
    DUPLICATE_PREFIX,
    ExecutorParseError,
    FORCED_DEFAULT_RATIONALE,
    MEMORY_FIRST_DIRECTIVE,
    MemoryPolicy,
    TOOLS_UNAVAILABLE_NOTE,
    parse_agent_output,
    verify,
)
from verimem.gateway import CallCounter, ReplayGateway
from verimem.memory import MemoryStore
from verimem.models import (
    Answer,
    Claim,
    Decomposition,
    ToolCall,
    Triplet,
    VeracityLabel,
)
from verimem.providers import ScriptedProvider

from conftest import answer_json, make_evidence, tool_json

CLAIM = Claim("c1", "Water boils at 100 C at sea level.")
DECOMPOSITION = Decomposition(
    triplets=(Triplet("water", "boils at", "100 C"),), topics=("Science",)
)


class RecordingProvider:
    def __init__(self, script):
        self._inner = ScriptedProvider(script)
        self.prompts: list[str] = []

    def complete(self, messages):
        self.prompts.append("\n\n".join(m.content for m in messages))
        return self._inner.complete(messages)


class TestParseAgentOutput:
    def test_tool_call_shape(self):
        output = parse_agent_output(
            '{"thought":"t","action":{"name":"search_google","reason":"r","input":"q"}}'
        )
        assert output.action == ToolCall("search_google", "r", "q")
        assert output.thought == "t"

    def test_fenced_and_case_insensitive_answer(self):
        output = parse_agent_output('```json\n{"thought":"t","answer":"FALSE"}\n```')
        assert output.action == Answer(VeracityLabel.FALSE)

    def test_answer_outside_label_domain_rejected(self):
        with pytest.raises(AgentParseError):
            parse_agent_output('{"thought":"t","answer":"maybe"}')

    def test_boolean_answer_tolerated(self):
        assert parse_agent_output('{"thought":"t","answer":true}').action == Answer(
            VeracityLabel.TRUE
        )

    def test_both_keys_answer_wins(self):
        output = parse_agent_output(
            '{"thought":"t","answer":"True","action":{"name":"search_google","reason":"r","input":"q"}}'
        )
        assert output.action == Answer(VeracityLabel.TRUE)

    def test_surrounding_prose_discarded(self):
        output = parse_agent_output(
            'Sure, here is my step:\n{"thought":"t","answer":"True"}\nDone!'
        )
        assert output.action == Answer(VeracityLabel.TRUE)

    def test_missing_both_keys_rejected(self):
        with pytest.raises(AgentParseError):
            parse_agent_output('{"thought":"only thinking"}')

    def test_action_without_name_rejected(self):
        with pytest.raises(AgentParseError):
            parse_agent_output('{"thought":"t","action":{"reason":"r","input":"q"}}')

    def test_no_json_rejected(self):
        with pytest.raises(AgentParseError):
            parse_agent_output("I will now search the web.")

    def test_first_object_wins_over_later_ones(self):
        raw = '{"thought":"a","answer":"True"} {"thought":"b","answer":"False"}'
        assert parse_agent_output(raw).action == Answer(VeracityLabel.TRUE)


class TestVerifyLoop:
    def test_immediate_answer_zero_retrieval(self):
        provider = ScriptedProvider([answer_json("True", thought="known fact")])
        counter = CallCounter()
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider,
            counter=counter,
        )
        assert outcome.verdict.label is VeracityLabel.TRUE
        assert outcome.verdict.rationale == "known fact"
        assert len(outcome.trajectory.steps) == 1
        assert counter.issued_total == 0
        assert outcome.delta == ()
        assert not outcome.trajectory.forced

    def test_tool_then_answer(self):
        gateway = ReplayGateway(
            [{"tool": "search_google", "input": "boiling point", "content": "100 C at 1 atm"}]
        )
        provider = ScriptedProvider(
            [tool_json("search_google", "boiling point"), answer_json("True")]
        )
        counter = CallCounter()
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider, counter=counter)
        assert [type(s.action) for s in outcome.trajectory.steps] == [ToolCall, Answer]
        assert outcome.trajectory.steps[0].observation == "100 C at 1 atm"
        assert counter.issued == {"search_google": 1}
        assert counter.succeeded == {"search_google": 1}
        assert len(outcome.delta) == 1
        assert outcome.delta[0].claim_id == "c1"
        assert outcome.delta[0].query == "boiling point"

    def test_corrective_reprompt_recovers(self):
        provider = RecordingProvider(["not json at all", answer_json("True")])
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider)
        assert outcome.verdict.label is VeracityLabel.TRUE
        assert outcome.provider_calls == 2
        assert CORRECTIVE_REPROMPT in provider.prompts[1]
        assert "not json at all" in provider.prompts[1]

    def test_two_consecutive_failures_raise(self):
        provider = ScriptedProvider(["garbage", "more garbage"])
        with pytest.raises(ExecutorParseError):
            verify(CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider)

    def test_unknown_tool_becomes_explicit_observation(self):
        provider = ScriptedProvider(
            [tool_json("search_googel", "x"), answer_json("False")]
        )
        counter = CallCounter()
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, counter=counter
        )
        observation = outcome.trajectory.steps[0].observation
        assert observation.startswith("Error: unknown tool 'search_googel'")
        assert "search_google" in observation
        assert counter.issued == {"search_googel": 1}
        assert counter.succeeded_total == 0

    def test_tool_error_result_is_observation_not_abort(self):
        gateway = ReplayGateway([])  # every call is a recorded-miss error
        provider = ScriptedProvider([tool_json("search_google", "q"), answer_json("False")])
        counter = CallCounter()
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider, counter=counter)
        assert outcome.verdict.label is VeracityLabel.FALSE
        assert "no recorded result" in outcome.trajectory.steps[0].observation
        assert counter.issued_total == 1
        assert counter.succeeded_total == 0

    def test_duplicate_query_repeats_previous_result_without_reinvoking(self):
        calls = []

        class CountingGateway(ReplayGateway):
            def _call(self, spec, input_text):
                calls.append(input_text)
                return super()._call(spec, input_text)

        gateway = CountingGateway(
            [{"tool": "search_google", "input": "q", "content": "payload"}]
        )
        provider = ScriptedProvider(
            [
                tool_json("search_google", "q"),
                tool_json("search_google", "q"),
                answer_json("True"),
            ]
        )
        counter = CallCounter()
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider, counter=counter)
        first, second = outcome.trajectory.steps[:2]
        assert first.observation == "payload"
        assert second.observation == f"{DUPLICATE_PREFIX} payload"
        assert calls == ["q"]  # the tool ran once
        assert counter.issued == {"search_google": 2}  # both queries counted

    def test_memory_only_issues_zero_gateway_calls(self):
        provider = ScriptedProvider(
            [tool_json("search_google", "q"), answer_json("True")]
        )
        counter = CallCounter()
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), None, provider,
            policy=MemoryPolicy.ONLY, counter=counter,
        )
        assert outcome.trajectory.steps[0].observation == TOOLS_UNAVAILABLE_NOTE
        assert outcome.verdict.label is VeracityLabel.TRUE
        assert counter.issued_total == 1
        assert counter.succeeded_total == 0

    def test_memory_off_skips_recall(self):
        store = MemoryStore()
        store.update(["water"], [make_evidence("the fact", query="prior")])
        provider = RecordingProvider([answer_json("True")])
        outcome = verify(
            CLAIM, DECOMPOSITION, store, ReplayGateway([]), provider,
            policy=MemoryPolicy.OFF,
        )
        assert outcome.recalled == ()
        assert "the fact" not in provider.prompts[0]

    def test_memory_on_injects_recalled_evidence(self):
        store = MemoryStore()
        store.update(["water"], [make_evidence("the fact", query="prior")])
        provider = RecordingProvider([answer_json("True")])
        outcome = verify(CLAIM, DECOMPOSITION, store, ReplayGateway([]), provider)
        assert len(outcome.recalled) == 1
        assert "the fact" in provider.prompts[0]

    def test_memory_first_adds_directive(self):
        provider = RecordingProvider([answer_json("True")])
        verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider,
            policy=MemoryPolicy.FIRST,
        )
        assert MEMORY_FIRST_DIRECTIVE in provider.prompts[0]

    def test_history_monotonicity_in_rendered_prompts(self):
        gateway = ReplayGateway(
            [
                {"tool": "search_google", "input": "q1", "content": "obs-one"},
                {"tool": "search_google", "input": "q2", "content": "obs-two"},
            ]
        )
        provider = RecordingProvider(
            [
                tool_json("search_google", "q1", thought="think-1"),
                tool_json("search_google", "q2", thought="think-2"),
                answer_json("True", thought="think-3"),
            ]
        )
        verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider)
        assert "obs-one" in provider.prompts[1]
        assert "think-1" in provider.prompts[1]
        for fragment in ("think-1", "obs-one", "think-2", "obs-two"):
            assert fragment in provider.prompts[2]

    def test_prompt_section_order(self):
        provider = RecordingProvider([answer_json("True")])
        verify(CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider)
        prompt = provider.prompts[0]
        positions = [
            prompt.index("ReAct (Reasoning and Acting) agent"),
            prompt.index(CLAIM.text),
            prompt.index("Triplets:"),
            prompt.index("Memory:"),
            prompt.index("Available tools:"),
        ]
        assert positions == sorted(positions)

    def test_step_counter_rendered(self):
        provider = RecordingProvider([answer_json("True")])
        verify(CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, t_max=3)
        assert "Current step: 1 of 3" in provider.prompts[0]
        assert "this may be your last chance to answer" in provider.prompts[0]

    def test_delta_matches_nonempty_tool_observations(self):
        gateway = ReplayGateway(
            [
                {"tool": "search_google", "input": "q1", "content": "A" * 2500},
                {"tool": "search_google", "input": "q2", "content": "short"},
            ]
        )
        provider = ScriptedProvider(
            [
                tool_json("search_google", "q1"),
                tool_json("search_google", "q2"),
                answer_json("True"),
            ]
        )
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider)
        observations = [
            step.observation
            for step in outcome.trajectory.steps
            if isinstance(step.action, ToolCall) and step.observation
        ]
        assert [record.content for record in outcome.delta] == [
            obs[:2000] for obs in observations
        ]
        assert len(outcome.delta[0].content) == 2000

    def test_timestamps_non_decreasing_in_delta(self):
        gateway = ReplayGateway(
            [{"tool": "search_google", "input": f"q{i}", "content": f"c{i}"} for i in range(3)]
        )
        provider = ScriptedProvider(
            [tool_json("search_google", f"q{i}") for i in range(3)] + [answer_json("True")]
        )
        outcome = verify(CLAIM, DECOMPOSITION, MemoryStore(), gateway, provider)
        stamps = [record.timestamp for record in outcome.delta]
        assert stamps == sorted(stamps)

    def test_t_max_must_be_positive(self):
        with pytest.raises(ValueError):
            verify(CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]),
                   ScriptedProvider([]), t_max=0)


class TestForceAnswer:
    def test_loop_bound_with_forced_verdict(self):
        provider = ScriptedProvider([tool_json("search_google", f"q{i}") for i in range(7)])
        counter = CallCounter()
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider,
            t_max=5, counter=counter,
        )
        tool_steps = [s for s in outcome.trajectory.steps if isinstance(s.action, ToolCall)]
        assert len(tool_steps) == 5
        assert len(outcome.trajectory.steps) == 6
        assert outcome.trajectory.forced
        assert outcome.verdict.label is VeracityLabel.FALSE
        assert outcome.verdict.rationale == FORCED_DEFAULT_RATIONALE
        assert outcome.provider_calls == 7
        assert outcome.provider_calls <= 2 * (5 + 2)

    def test_force_parses_answer(self):
        script = [tool_json("search_google", f"q{i}") for i in range(5)]
        script.append(answer_json("False", thought="insufficient"))
        provider = ScriptedProvider(script)
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, t_max=5
        )
        assert outcome.trajectory.forced
        assert outcome.verdict.label is VeracityLabel.FALSE
        assert outcome.verdict.rationale == "insufficient"

    def test_force_true_verdict(self):
        script = [tool_json("search_google", "q")] + [
            answer_json("True", thought="evidence supports")
        ]
        provider = ScriptedProvider(script)
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, t_max=1
        )
        assert outcome.trajectory.forced
        assert outcome.verdict.label is VeracityLabel.TRUE

    def test_force_retry_then_answer(self):
        script = [tool_json("search_google", "q"), "garbled", answer_json("True")]
        provider = ScriptedProvider(script)
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, t_max=1
        )
        assert outcome.verdict.label is VeracityLabel.TRUE
        assert outcome.provider_calls == 3

    def test_force_both_malformed_fails_closed(self):
        script = [tool_json("search_google", "q"), "bad", "worse"]
        provider = ScriptedProvider(script)
        outcome = verify(
            CLAIM, DECOMPOSITION, MemoryStore(), ReplayGateway([]), provider, t_max=1
        )
        assert outcome.verdict.label is VeracityLabel.FALSE
        assert outcome.verdict.rationale == FORCED_DEFAULT_RATIONALE
        assert outcome.trajectory.forced

import sys
import time
import logging
import argparse

from config import (DATABASE_PATH, DECIDE_CONFIG, EXIT_CODES, EXPORT_DIR, HILBERT_BUDGET, LOGGING_CONFIG,
                    POOL_DEFAULTS, THETA_CONFIG)
from decide import decide_matrices
from equational_semantics import (FormulaPool, QueryShapeError, TauSet, ThetaQuery, WitnessError,
                                  find_equivalent_pair, find_suszko_failure, theta_member,
                                  theta_member_bounded, theta_member_graph_based, graph_tau_shape,
                                  verify_algebraic_semantics_bounded)
from finite_algebra import AlgebraError, BoundExceededError, CongruenceError, free_algebra
from hilbert import Budget, decide_locally_tabular, split_top_level
from matrix_logic import (consequence_brute_force, deductive_filters, filter_generated, find_counter_valuation,
                          leibniz_congruence, leibniz_congruence_brute_force, reduce_matrix, tarski_congruence)
from problem_file import ProblemFile, ProblemFileError, Report, congruence_to_dict, elements_to_list
from report_store import ReportStore
from terms import ParseError, SignatureError, parse_equation, parse_formula, to_text
from tm_encoding import (ConfigurationError, MachineError, demo_halting_derivation, distinct_equivalences,
                         encode_calculus, load_machine, simulate)


INPUT_ERRORS = (ProblemFileError, ParseError, SignatureError, AlgebraError, CongruenceError,
                QueryShapeError, WitnessError, MachineError, ConfigurationError)

CHECKS = ('consequence', 'leibniz', 'reduce', 'filter', 'tarski', 'theta-member', 'verify-tau',
          'suszko', 'free-algebra', 'equiv-pair')


def setup_logging(level = None):
    """
    Setup logging for command line runs
    """
    logging.basicConfig(
        level = getattr(logging, (level or LOGGING_CONFIG['level']).upper()),
        format = LOGGING_CONFIG['format'],
        handlers = [logging.FileHandler(LOGGING_CONFIG['file']),
                    logging.StreamHandler()
                    ]
    )


class ProblemRunner:
    def __init__(self, args):
        self.args = args
        self.logger = logging.getLogger(__name__)
        self.theta_config = dict(THETA_CONFIG)
        self.decide_config = dict(DECIDE_CONFIG)
        self.apply_overrides()

    def apply_overrides(self):
        """
        Per-run overrides, applied to this runner's copies of the configuration
        """
        if self.args.chain_bound is not None:
            self.theta_config['chain_bound'] = self.args.chain_bound
        if self.args.theta_method is not None:
            self.theta_config['method'] = self.args.theta_method
        if self.args.exhaustive_ri:
            self.decide_config['exhaustive_ri'] = True

    def pool(self) -> FormulaPool:
        return FormulaPool(depth = self.args.depth, variables = self.args.vars,
                           premises_max = self.args.premises_max, max_formulas = self.args.max_formulas)

    def budget(self) -> Budget:
        return Budget(max_depth = self.args.budget_depth, max_vars = self.args.budget_vars,
                      max_derived = self.args.budget_derived, max_iterations = self.args.budget_iterations)

    def formulas(self, texts, sig):
        found = []
        for text in texts or []:
            found.extend(parse_formula(part, sig) for part in split_top_level(text))
        return found

    def tau(self, problem: ProblemFile) -> TauSet:
        if self.args.tau:
            return TauSet.parse(self.args.tau, problem.sig)
        if problem.tau is None:
            raise ProblemFileError(f"{problem.source}: no tau given (use --tau or a 'tau' entry)")
        return problem.tau

    # ============ COMMANDS ============

    def cmd_decide(self) -> Report:
        problem = ProblemFile.load(self.args.file)
        if problem.matrices:
            decision = decide_matrices(problem.family(), self.decide_config['exhaustive_ri'])
            if self.args.trace_csv:
                decision.trace_frame().to_csv(self.args.trace_csv, index = False)
                self.logger.info(f"Decision trace written to {self.args.trace_csv}")
            return Report('decide', problem.name, decision.to_dict(), decision.answer)

        if problem.calculus is None:
            raise ProblemFileError(f"{problem.source}: neither matrices nor a calculus given")
        if not self.args.promise_locally_tabular:
            raise ProblemFileError("Deciding a calculus requires --promise-locally-tabular")
        result = decide_locally_tabular(problem.calculus, self.budget(), self.decide_config['exhaustive_ri'])
        if result.status != 'decided':
            self.logger.warning(f"Locally tabular decision ended with {result.status}: {result.detail}")
            return Report('decide', problem.name, result.to_dict(), 'inconclusive')
        if self.args.trace_csv:
            result.decision.trace_frame().to_csv(self.args.trace_csv, index = False)
        return Report('decide', problem.name, result.to_dict(), result.decision.answer)

    def cmd_check(self) -> Report:
        problem = ProblemFile.load(self.args.file)
        handler = getattr(self, 'check_' + self.args.check.replace('-', '_'))
        result = handler(problem)
        return Report(f"check {self.args.check}", problem.name, result)

    def check_consequence(self, problem: ProblemFile) -> dict:
        M = problem.family()
        premises = self.formulas(self.args.premises, problem.sig)
        if not self.args.goal:
            raise ProblemFileError("check consequence needs --goal")
        goal = parse_formula(self.args.goal, problem.sig)
        counter = find_counter_valuation(M, premises, goal)
        result = {'premises': [to_text(p) for p in premises], 'goal': to_text(goal), 'holds': counter is None}
        if counter is not None:
            index, valuation = counter
            A = M[index].algebra
            result['counter'] = {'matrix': index, 'valuation': {k: A.label(v) for k, v in valuation.items()}}
        if self.args.oracle:
            oracle = consequence_brute_force(M, premises, goal)
            result['oracle'] = {'holds': oracle, 'agree': oracle == (counter is None)}
        return result

    def check_leibniz(self, problem: ProblemFile) -> dict:
        m = problem.matrix(self.args.matrix)
        omega = leibniz_congruence(m.algebra, m.designated)
        result = {'matrix': m.describe(), 'congruence': congruence_to_dict(m.algebra, omega)}
        if self.args.oracle:
            oracle = leibniz_congruence_brute_force(m.algebra, m.designated)
            result['oracle'] = {'congruence': congruence_to_dict(m.algebra, oracle), 'agree': oracle == omega}
        return result

    def check_reduce(self, problem: ProblemFile) -> dict:
        m = problem.matrix(self.args.matrix)
        reduced = reduce_matrix(m)
        return {'matrix': m.describe(), 'reduced': {'algebra': reduced.algebra.to_dict(),
                                                    'designated': elements_to_list(reduced.algebra, reduced.designated)}}

    def check_filter(self, problem: ProblemFile) -> dict:
        M = problem.family()
        B = problem.algebra(self.args.algebra)
        if self.args.subset is None:
            filters = deductive_filters(M, B)
            return {'algebra': B.name, 'filters': [elements_to_list(B, F) for F in filters]}
        subset = [B.index_of(e.strip()) for e in self.args.subset.split(',') if e.strip()]
        generated = filter_generated(M, B, subset)
        return {'algebra': B.name, 'subset': elements_to_list(B, subset),
                'generated': elements_to_list(B, generated)}

    def check_tarski(self, problem: ProblemFile) -> dict:
        A = problem.algebra(self.args.algebra)
        return {'algebra': A.name, 'congruence': congruence_to_dict(A, tarski_congruence(problem.family(), A))}

    def check_theta_member(self, problem: ProblemFile) -> dict:
        tau = self.tau(problem)
        gamma = tuple(self.formulas(self.args.gamma, problem.sig))
        if not self.args.target:
            raise ProblemFileError("check theta-member needs --target 'lhs ~ rhs'")
        query = ThetaQuery(gamma, tau, parse_equation(self.args.target, problem.sig))
        membership = theta_member(query, problem.sig, self.theta_config['method'],
                                  self.theta_config['chain_bound'])
        result = {'gamma': [to_text(g) for g in gamma], 'tau': tau.to_list(), 'target': str(query.target),
                  'membership': membership.to_dict()}
        if self.args.oracle:
            chain = theta_member_bounded(query, self.theta_config['chain_bound'])
            methods = {membership.method: membership.status, 'chain': chain.status}
            if graph_tau_shape(tau, problem.sig) is not None:
                methods['gcd'] = 'member' if theta_member_graph_based(query, problem.sig) else 'non-member'
            decided = {status for status in methods.values() if status != 'unknown'}
            result['oracle'] = {'methods': methods, 'chain': chain.to_dict().get('chain'),
                                'agree': len(decided) <= 1}
        return result

    def check_verify_tau(self, problem: ProblemFile) -> dict:
        report = verify_algebraic_semantics_bounded(problem.family(), self.tau(problem), self.pool(),
                                                    semantics = self.args.semantics,
                                                    method = self.theta_config['method'],
                                                    chain_bound = self.theta_config['chain_bound'])
        return report.to_dict()

    def check_suszko(self, problem: ProblemFile) -> dict:
        tau = self.tau(problem)
        failure = find_suszko_failure(problem.family(), tau)
        return {'tau': tau.to_list(), 'holds': failure is None, 'failure': failure}

    def check_free_algebra(self, problem: ProblemFile) -> dict:
        names = self.args.algebras or sorted(problem.algebras)
        K = [problem.algebra(name) for name in names]
        F, generators, witness = free_algebra(K, self.args.generators, problem.sig)
        return {'class': names, 'generators': self.args.generators, 'size': F.size,
                'elements': [to_text(witness[i]) for i in range(F.size)]}

    def check_equiv_pair(self, problem: ProblemFile) -> dict:
        pair = find_equivalent_pair(problem.family())
        return {'pair': None if pair is None else [to_text(f) for f in pair]}

    def cmd_encode_tm(self) -> Report:
        machine_file = load_machine(self.args.file)
        H = encode_calculus(machine_file.machine, machine_file.input)
        groups = {group: [str(H.rules[i]) for i in members] for group, members in H.groups.items()}
        return Report('encode-tm', machine_file.machine.name or self.args.file,
                      {'signature': H.sig.to_dict(), 'rules': groups, 'rule_count': len(H)})

    def cmd_tm_demo(self) -> Report:
        machine_file = load_machine(self.args.file)
        machine, t = machine_file.machine, machine_file.input
        name = machine.name or self.args.file
        proof = demo_halting_derivation(machine, t, self.args.steps)
        if proof is not None:
            H = encode_calculus(machine, t)
            lines = proof.to_dict()['lines']
            for line, entry in zip(proof.lines, lines):
                entry['group'] = H.group_of(line.rule)
            return Report('tm-demo', name, {'halted': True, 'proof': lines,
                                            'theorem': to_text(proof.conclusion)}, 'yes')
        run = simulate(machine, t, self.args.steps)
        found = distinct_equivalences(encode_calculus(machine, t), machine_file.budget)
        return Report('tm-demo', name, {'halted': False, 'steps': run.steps,
                                        'final_tape': run.configurations[-1].tape(),
                                        'distinct_equivalences': [to_text(f) for f in found]}, 'inconclusive')

    def cmd_export_reports(self) -> Report:
        store = ReportStore(self.args.db)
        filename = store.export_reports(self.args.format, export_dir = self.args.export_dir)
        return Report('export-reports', self.args.db, {'file': filename})

    # ============ DRIVER ============

    def run(self) -> int:
        command = self.args.command.replace('-', '_')
        start = time.perf_counter()
        try:
            report = getattr(self, 'cmd_' + command)()
        except INPUT_ERRORS as e:
            self.logger.error(f"Input error: {e}")
            return EXIT_CODES['input_error']
        except BoundExceededError as e:
            self.logger.error(f"Bound exceeded: {e}")
            return EXIT_CODES['inconclusive']

        if self.args.timing:
            report.timing = time.perf_counter() - start
        print(report.to_json())
        if self.args.json_out:
            report.save(self.args.json_out)
        if self.args.store and command != 'export_reports':
            ReportStore(self.args.db).save_report(report)

        if report.answer in EXIT_CODES:
            return EXIT_CODES[report.answer]
        return 0


def build_parser():
    parser = argparse.ArgumentParser(description = "Decide and check algebraic semantics of finitely presented logics")
    parser.add_argument('--log-level', default = None, help = "Override the configured log level")
    parser.add_argument('--json-out', default = None, metavar = 'PATH', help = "Also write the report to PATH")
    parser.add_argument('--store', action = 'store_true', help = "Store the report in the sqlite report store")
    parser.add_argument('--db', default = DATABASE_PATH, help = "Report store database")
    parser.add_argument('--timing', action = 'store_true', help = "Include wall time in the report")
    parser.add_argument('--oracle', action = 'store_true', help = "Diff against the brute-force implementation")

    pool = parser.add_argument_group('bounded verification')
    pool.add_argument('--depth', type = int, default = POOL_DEFAULTS['depth'])
    pool.add_argument('--vars', type = int, default = POOL_DEFAULTS['variables'])
    pool.add_argument('--premises-max', type = int, default = POOL_DEFAULTS['premises_max'])
    pool.add_argument('--max-formulas', type = int, default = POOL_DEFAULTS['max_formulas'])
    pool.add_argument('--chain-bound', type = int, default = None)
    pool.add_argument('--theta-method', choices = ['closure', 'bounded'], default = None)

    decide = parser.add_argument_group('decision')
    decide.add_argument('--exhaustive-ri', action = 'store_true', help = "Enumerate literal R/I premise sets")
    decide.add_argument('--promise-locally-tabular', action = 'store_true')
    decide.add_argument('--trace-csv', default = None, metavar = 'PATH')
    decide.add_argument('--budget-depth', type = int, default = HILBERT_BUDGET['max_depth'])
    decide.add_argument('--budget-vars', type = int, default = HILBERT_BUDGET['max_vars'])
    decide.add_argument('--budget-derived', type = int, default = HILBERT_BUDGET['max_derived'])
    decide.add_argument('--budget-iterations', type = int, default = HILBERT_BUDGET['max_iterations'])

    commands = parser.add_subparsers(dest = 'command', required = True)

    decide_cmd = commands.add_parser('decide', help = "Decide whether the logic has an algebraic semantics")
    decide_cmd.add_argument('file')

    check = commands.add_parser('check', help = "Run one building block on a problem file")
    check.add_argument('check', choices = CHECKS)
    check.add_argument('file')
    check.add_argument('--premises', action = 'append', help = "Comma separated premises; repeatable")
    check.add_argument('--goal')
    check.add_argument('--matrix', help = "Algebra name of the matrix to use")
    check.add_argument('--algebra', help = "Algebra name")
    check.add_argument('--algebras', action = 'append', help = "Class of algebras for free-algebra")
    check.add_argument('--subset', help = "Comma separated elements generating a filter")
    check.add_argument('--gamma', action = 'append', help = "Comma separated formulas; repeatable")
    check.add_argument('--target', help = "Equation 'lhs ~ rhs'")
    check.add_argument('--tau', help = "Equations 'l1 ~ r1; l2 ~ r2'")
    check.add_argument('--semantics', choices = ['reducts', 'syntactic'], default = 'reducts')
    check.add_argument('--generators', type = int, default = 1)

    encode = commands.add_parser('encode-tm', help = "Print the calculus of a machine and input")
    encode.add_argument('file')

    demo = commands.add_parser('tm-demo', help = "Replay a halting run as a proof of x -> (x . x)")
    demo.add_argument('file')
    demo.add_argument('--steps', type = int, default = 50)

    export = commands.add_parser('export-reports', help = "Export stored reports with pandas")
    export.add_argument('--format', choices = ['csv', 'json'], default = 'csv')
    export.add_argument('--export-dir', default = EXPORT_DIR)

    return parser


def main(argv = None):
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    runner = ProblemRunner(args)
    return runner.run()


if __name__ == '__main__':
    sys.exit(main())

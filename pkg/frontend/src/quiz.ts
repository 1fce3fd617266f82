import type { ApiClient } from './api';
import { ApiError } from './api';
import type { Assessment, Attempt } from './types';

export type QuizPhase = 'running' | 'submitted' | 'expired';

export interface QuizCallbacks {
  onTick?: (remainingSeconds: number) => void;
  onPhase?: (phase: QuizPhase, attempt: Attempt | null) => void;
  onSaveError?: (err: unknown) => void;
}

interface TimerHandle {
  cancel(): void;
}

export interface Scheduler {
  every(ms: number, fn: () => void): TimerHandle;
}

const realScheduler: Scheduler = {
  every(ms, fn) {
    const id = setInterval(fn, ms);
    return { cancel: () => clearInterval(id) };
  },
};

/**
 * Drives one quiz/exam attempt: a countdown to the effective deadline
 * (min of closes_at and started_at + duration_limit, pre-computed by the
 * server into attempt.deadline), autosave of every answer change, and a
 * final autosubmit of the saved answers the moment the countdown hits zero.
 *
 * Autosaves are queued FIFO per attempt so a slow PATCH can never be
 * overtaken by a newer one and land stale on the server.
 */
export class QuizRunner {
  readonly answers: Array<number | null>;
  phase: QuizPhase = 'running';

  private saveChain: Promise<void> = Promise.resolve();
  private ticker: TimerHandle | null = null;
  private deadlineMs: number;

  constructor(
    private readonly api: ApiClient,
    readonly assessment: Assessment,
    private attempt: Attempt,
    private readonly callbacks: QuizCallbacks = {},
    private readonly now: () => number = () => Date.now(),
    scheduler: Scheduler = realScheduler,
  ) {
    this.answers = [...attempt.answers];
    this.deadlineMs = Date.parse(attempt.deadline);
    this.ticker = scheduler.every(1000, () => this.tick());
    this.tick();
  }

  remainingSeconds(): number {
    return Math.max(0, Math.ceil((this.deadlineMs - this.now()) / 1000));
  }

  /** Whether the submit button should be enabled right now. */
  canSubmit(): boolean {
    return this.phase === 'running' && this.remainingSeconds() > 0;
  }

  /** Record a choice and autosave it; called on every change. */
  answer(questionIndex: number, optionIndex: number | null): void {
    if (this.phase !== 'running') return;
    this.answers[questionIndex] = optionIndex;
    const snapshot = [...this.answers];
    this.saveChain = this.saveChain
      .then(() => this.api.saveAnswers(this.attempt.id, snapshot))
      .then(
        (updated) => {
          this.attempt = updated;
        },
        (err) => {
          if (err instanceof ApiError && err.code === 'deadline_passed') {
            this.finish('expired', null);
          } else {
            this.callbacks.onSaveError?.(err);
          }
        },
      );
  }

  /** Explicit submit; sends the current vector. */
  async submit(): Promise<Attempt | null> {
    if (!this.canSubmit()) return null;
    await this.saveChain; // drain the autosave queue first
    try {
      const result = await this.api.submitAttempt(this.attempt.id, [...this.answers]);
      this.finish('submitted', result);
      return result;
    } catch (err) {
      if (err instanceof ApiError && err.code === 'deadline_passed') {
        this.finish('expired', null);
        return null;
      }
      throw err;
    }
  }

  dispose(): void {
    this.ticker?.cancel();
    this.ticker = null;
  }

  private tick(): void {
    if (this.phase !== 'running') return;
    const remaining = this.remainingSeconds();
    this.callbacks.onTick?.(remaining);
    if (remaining <= 0) {
      // time's up: push whatever is saved; the server scores the autosaved
      // vector whether or not this request arrives in time
      this.saveChain
        .then(() => this.api.submitAttempt(this.attempt.id))
        .then(
          (result) => this.finish('submitted', result),
          () => this.finish('expired', null),
        );
      this.phase = 'expired'; // block further answers immediately
    }
  }

  private finish(phase: QuizPhase, attempt: Attempt | null): void {
    this.phase = phase;
    this.dispose();
    this.callbacks.onPhase?.(phase, attempt);
  }
}

/** Window state as the UI should present it, given the server clock skewless. */
export function quizAvailability(
  assessment: Assessment,
  nowMs: number,
): 'upcoming' | 'open' | 'closed' {
  if (nowMs < Date.parse(assessment.opens_at)) return 'upcoming';
  if (nowMs > Date.parse(assessment.closes_at)) return 'closed';
  return 'open';
}

export function formatCountdown(totalSeconds: number): string {
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, '0')}`;
}

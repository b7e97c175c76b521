// Assessment flow state machine, independent of the DOM so tests can drive
// it with a fake clock. The one timing rule that matters: displayed_at is
// captured when a question first becomes current and survives re-renders
// and failed submissions; answered_at is captured on the button press.

import {
  ApiClient,
  ApiError,
  EmotionSample,
  QuestionView,
  ResultView,
} from "./api";

export interface Clock {
  now(): number;
}

export const systemClock: Clock = { now: () => Date.now() };

export type Screen =
  | { kind: "login"; error?: string }
  | { kind: "question"; question: QuestionView; displayedAt: number; busy: boolean; error?: string }
  | { kind: "result"; result: ResultView; qrText: string }
  | { kind: "invalid"; revalidationsUsed: number }
  | { kind: "fatal"; message: string };

export class SessionFlow {
  private screen: Screen = { kind: "login" };
  private sessionId: string | null = null;

  constructor(
    private api: ApiClient,
    private clock: Clock = systemClock,
    private onChange: (screen: Screen) => void = () => {},
  ) {}

  get current(): Screen {
    return this.screen;
  }

  private show(screen: Screen): void {
    this.screen = screen;
    this.onChange(screen);
  }

  async start(username: string, education: number, job: number): Promise<void> {
    try {
      await this.api.createUser(username, education, job);
      const session = await this.api.startSession(username);
      this.sessionId = session.session_id;
      await this.showCurrentQuestion();
    } catch (error) {
      this.show({ kind: "login", error: describe(error) });
    }
  }

  private async showCurrentQuestion(): Promise<void> {
    const question = await this.api.getQuestion(this.sessionId!);
    // the latency clock starts the moment the question becomes visible
    this.show({ kind: "question", question, displayedAt: this.clock.now(), busy: false });
  }

  async answer(value: "Yes" | "No", emotion: EmotionSample): Promise<void> {
    if (this.screen.kind !== "question" || this.screen.busy) return;
    const asked = this.screen;
    const answeredAt = this.clock.now();
    this.show({ ...asked, busy: true, error: undefined });
    try {
      const transition = await this.api.submitAnswer(
        this.sessionId!,
        value,
        asked.displayedAt,
        answeredAt,
        emotion,
      );
      if (transition.state === "Completed") {
        await this.showResult();
      } else if (transition.state === "Invalid") {
        this.show({ kind: "invalid", revalidationsUsed: transition.revalidations_used });
      } else {
        await this.showCurrentQuestion();
      }
    } catch (error) {
      // keep the question and its original displayedAt so a retry stays honest
      this.show({ ...asked, busy: false, error: describe(error) });
    }
  }

  async skip(): Promise<void> {
    if (this.screen.kind !== "question" || this.screen.busy) return;
    const asked = this.screen;
    this.show({ ...asked, busy: true, error: undefined });
    try {
      const outcome = await this.api.skip(this.sessionId!);
      if (outcome.state === "Invalid") {
        this.show({ kind: "invalid", revalidationsUsed: outcome.revalidations_used });
      } else {
        await this.showCurrentQuestion();
      }
    } catch (error) {
      this.show({ ...asked, busy: false, error: describe(error) });
    }
  }

  private async showResult(): Promise<void> {
    try {
      const result = await this.api.getResult(this.sessionId!);
      const qrText = await this.api.getQrText(this.sessionId!);
      this.show({ kind: "result", result, qrText });
    } catch (error) {
      this.show({ kind: "fatal", message: describe(error) });
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

// DOM rendering for the assessment flow. The client is a thin view: every
// number on screen comes from the server as-is (data-* attributes carry the
// raw values so tests can compare them to the API byte for byte).

import QRCode from "qrcode";
import { EmotionSample } from "./api";
import { Screen, SessionFlow } from "./flow";

export interface UiHandles {
  render(screen: Screen): void;
}

export function mountUi(root: HTMLElement, flow: SessionFlow): UiHandles {
  let emotionStub: EmotionSample = { valence: 0.2, arousal: 0.1, confidence: 0.95 };

  function render(screen: Screen): void {
    switch (screen.kind) {
      case "login":
        root.innerHTML = `
          <section class="card" id="login-screen">
            <h1>Risk tolerance assessment</h1>
            <p>30 yes/no situations. Answer at your own pace; you may skip
               up to 6 questions.</p>
            <label>Username <input id="username" autocomplete="off"></label>
            <label>Education level
              <select id="education">${levelOptions()}</select></label>
            <label>Job level
              <select id="job">${levelOptions()}</select></label>
            <button id="start">Start</button>
            ${screen.error ? `<p class="error">${escapeHtml(screen.error)}</p>` : ""}
          </section>`;
        byId("start").addEventListener("click", () => {
          const username = (byId("username") as HTMLInputElement).value.trim();
          const education = Number((byId("education") as HTMLSelectElement).value);
          const job = Number((byId("job") as HTMLSelectElement).value);
          if (username) void flow.start(username, education, job);
        });
        break;

      case "question": {
        const q = screen.question;
        root.innerHTML = `
          <section class="card" id="question-screen">
            <header>
              <span id="progress">${q.answered} / ${q.total_questions} answered</span>
              <span id="budget">skips left: ${q.revalidations_remaining}</span>
            </header>
            <h2 id="question-text" data-question-id="${q.question_id}">${escapeHtml(q.text)}</h2>
            <div class="answers">
              <button id="yes" ${screen.busy ? "disabled" : ""}>Yes</button>
              <button id="no" ${screen.busy ? "disabled" : ""}>No</button>
              <button id="skip" class="secondary" ${screen.busy ? "disabled" : ""}>Skip</button>
            </div>
            ${screen.error ? `<p class="error" id="submit-error">${escapeHtml(screen.error)} — your question is unchanged, try again.</p>` : ""}
            <details id="emotion-stub">
              <summary>Emotion input (development stub)</summary>
              <label>valence <input id="stub-valence" type="number" min="-1" max="1"
                     step="0.05" value="${emotionStub.valence}"></label>
              <label>arousal <input id="stub-arousal" type="number" min="-1" max="1"
                     step="0.05" value="${emotionStub.arousal}"></label>
              <label>confidence <input id="stub-confidence" type="number" min="0" max="1"
                     step="0.05" value="${emotionStub.confidence}"></label>
            </details>
          </section>`;
        const readStub = (): EmotionSample => {
          emotionStub = {
            valence: Number((byId("stub-valence") as HTMLInputElement).value),
            arousal: Number((byId("stub-arousal") as HTMLInputElement).value),
            confidence: Number((byId("stub-confidence") as HTMLInputElement).value),
          };
          return emotionStub;
        };
        byId("yes").addEventListener("click", () => void flow.answer("Yes", readStub()));
        byId("no").addEventListener("click", () => void flow.answer("No", readStub()));
        byId("skip").addEventListener("click", () => void flow.skip());
        break;
      }

      case "result": {
        const r = screen.result;
        const pctDisplay = (r.worthiness_pct * 100).toFixed(2);
        root.innerHTML = `
          <section class="card" id="result-screen">
            <h1>Your assessment</h1>
            <dl>
              <dt>Risk profile</dt>
              <dd id="risk-profile" data-coefficient="${r.risk_profile.coefficient}">
                ${r.risk_profile.label} (${r.risk_profile.primary}/${r.risk_profile.secondary})</dd>
              <dt>Thinking type</dt>
              <dd id="thinking-type" data-band="${r.thinking_type.band}">
                ${r.thinking_type.band}${r.thinking_type.unusual ? " (unusual)" : ""}</dd>
              <dt>Truthfulness</dt>
              <dd id="truthfulness" data-truthfulness="${r.truthfulness}">
                ${(r.truthfulness * 100).toFixed(2)}%</dd>
            </dl>
            <div class="gauge" aria-label="worthiness">
              <div class="gauge-track">
                <div class="gauge-fill" id="worthiness-gauge"
                     data-worthiness-pct="${r.worthiness_pct}"
                     style="width: ${gaugeWidth(r.worthiness_pct)}%"></div>
              </div>
              <span id="worthiness-label" data-worthiness-pct="${r.worthiness_pct}">${pctDisplay}%</span>
            </div>
            <h2>Result pass</h2>
            <canvas id="qr-canvas" width="220" height="220"></canvas>
            <pre id="qr-text">${escapeHtml(screen.qrText)}</pre>
          </section>`;
        const canvas = byId("qr-canvas") as HTMLCanvasElement;
        QRCode.toCanvas(canvas, screen.qrText, { width: 220, margin: 1 }).catch(() => {
          canvas.remove(); // no canvas support (tests); the raw text stays
        });
        break;
      }

      case "invalid":
        root.innerHTML = `
          <section class="card" id="invalid-screen">
            <h1>Session invalid</h1>
            <p>More than 6 revalidations (${screen.revalidationsUsed}) were used,
               so this questionnaire is considered untruthful. Start over with a
               new username to try again.</p>
          </section>`;
        break;

      case "fatal":
        root.innerHTML = `
          <section class="card" id="fatal-screen">
            <h1>Something went wrong</h1>
            <p class="error">${escapeHtml(screen.message)}</p>
          </section>`;
        break;
    }
  }

  function byId(id: string): HTMLElement {
    const el = root.querySelector<HTMLElement>(`#${id}`);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  }

  return { render };
}

// worthiness is displayed on its 20-100% scale
function gaugeWidth(pct: number): number {
  return Math.max(0, Math.min(100, ((pct - 0.2) / 0.8) * 100));
}

function levelOptions(): string {
  return [1, 2, 3, 4, 5, 6]
    .map((level) => `<option value="${level}" ${level === 3 ? "selected" : ""}>${level}</option>`)
    .join("");
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

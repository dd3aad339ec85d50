double control(double x1){
  if (x1 < -1) x1 = -1;
  if (x1 > 1) x1 = 1;

  if (-1 <= x1 && x1 <= -0.5){
    u = 4 * x1 - 6;
  }else if(-0.5 < x1 && x1 < 0.5){
    u = 2 * x1 + 9;
  }else if(0.5 <= x1 && x1 <= 1){
    u = -4 * x1 - 6;
  }
  return u;
}
